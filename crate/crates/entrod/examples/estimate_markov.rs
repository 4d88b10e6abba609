//! Entropy rate of a two-state Markov chain; the mixture adapts to the
//! first-order memory without being told the order.
//!
//! ```bash
//! cargo run --example estimate_markov
//! ```

use entrod::core::standard_grid;
use entrod::npd::{entropy_rate_estimate, NpdConfig};
use entrod::quantization::{PartitionScheme, ReferenceMeasure};
use entrod::sources::{entropy_oracle, generate, stationary_distribution, SourceModel};

fn main() -> entrod::Result<()> {
    let transition = vec![vec![0.9, 0.1], vec![0.2, 0.8]];
    let pi = stationary_distribution(&transition)?;
    let model = SourceModel::MarkovChain { transition };
    let n = 1 << 15;
    let data = generate(&model, 7, 0, n)?;
    let cfg = NpdConfig::new(
        PartitionScheme::TrivialFinite { alphabet_size: 2 },
        ReferenceMeasure::CountingFinite { alphabet_size: 2 },
    )?;
    let traj = entropy_rate_estimate(&data, &cfg, &standard_grid(n))?;
    let oracle = entropy_oracle(&model)?;
    println!("stationary distribution: ({:.4}, {:.4})", pi[0], pi[1]);
    println!("true entropy rate {oracle:.6} nats");
    for p in &traj.points {
        println!("n = {:>6}: estimate {:.6}", p.n, p.estimate_nats);
    }
    Ok(())
}
