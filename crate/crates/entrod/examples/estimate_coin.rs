//! Entropy rate of a biased coin from the finite-alphabet mixture.
//!
//! ```bash
//! cargo run --example estimate_coin
//! ```

use entrod::core::standard_grid;
use entrod::npd::{entropy_rate_estimate, NpdConfig};
use entrod::quantization::{PartitionScheme, ReferenceMeasure};
use entrod::sources::{entropy_oracle, generate, SourceModel};

fn main() -> entrod::Result<()> {
    let model = SourceModel::IidCategorical {
        probs: vec![0.3, 0.7],
        first_symbol: 0,
    };
    let n = 1 << 15;
    let data = generate(&model, 2024, 0, n)?;
    let cfg = NpdConfig::new(
        PartitionScheme::TrivialFinite { alphabet_size: 2 },
        ReferenceMeasure::CountingFinite { alphabet_size: 2 },
    )?;
    let grid = standard_grid(n);
    let traj = entropy_rate_estimate(&data, &cfg, &grid)?;
    let oracle = entropy_oracle(&model)?;
    println!("biased coin, true entropy rate {oracle:.6} nats");
    println!("{:>8}  {:>10}  {:>10}", "n", "estimate", "error");
    for p in &traj.points {
        println!(
            "{:>8}  {:>10.6}  {:>+10.6}",
            p.n,
            p.estimate_nats,
            p.estimate_nats - oracle
        );
    }
    Ok(())
}
