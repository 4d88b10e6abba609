//! Online 0-1-loss prediction: the Cesàro-mean predictor approaches the
//! unpredictability rate of the source.
//!
//! ```bash
//! cargo run --example predict_coin
//! ```

use entrod::core::standard_grid;
use entrod::prediction::{mistake_rate, BaseMeasure, PredictorConfig};
use entrod::sources::{generate, unpredictability_oracle, SourceModel};

fn main() -> entrod::Result<()> {
    let n = 6_000;
    let models = [
        (
            "Bernoulli(0.3)",
            SourceModel::IidCategorical {
                probs: vec![0.3, 0.7],
                first_symbol: 0,
            },
        ),
        (
            "Markov [[0.9,0.1],[0.2,0.8]]",
            SourceModel::MarkovChain {
                transition: vec![vec![0.9, 0.1], vec![0.2, 0.8]],
            },
        ),
    ];
    let cfg = PredictorConfig::auto(BaseMeasure::PpmTotal { alphabet_size: 2 }, n)?;
    for (name, model) in models {
        let data = generate(&model, 23, 0, n)?;
        let xs = data.as_symbolic().unwrap();
        let u = unpredictability_oracle(&model)?;
        let rates = mistake_rate(xs, &cfg, &standard_grid(n))?;
        println!("{name}: unpredictability rate u = {u:.4}");
        for (m, r) in rates {
            println!("  n = {m:>5}: mistake rate {r:.4}");
        }
    }
    Ok(())
}
