//! Prediction over an unbounded alphabet: the quantization-mixture base
//! restricts the argmax to seen symbols plus one fresh representative.
//!
//! ```bash
//! cargo run --example countable_prediction
//! ```

use entrod::npd::NpdConfig;
use entrod::prediction::{BaseMeasure, CesaroPredictor, PredictorConfig};
use entrod::quantization::{PartitionScheme, ReferenceMeasure};
use entrod::sources::{generate, unpredictability_oracle, SourceModel};

fn main() -> entrod::Result<()> {
    let model = SourceModel::IidGeometric { q: 0.5 };
    let n = 192;
    let data = generate(&model, 17, 0, n)?;
    let xs = data.as_symbolic().unwrap();
    let cfg = PredictorConfig::new(
        BaseMeasure::NpdTotal {
            config: NpdConfig::new(
                PartitionScheme::IncrementalNaturals,
                ReferenceMeasure::GeometricNaturals { q: 0.5 },
            )?,
        },
        Some(24),
    )?;
    let mut pred = CesaroPredictor::new(&cfg)?;
    let mut mistakes = 0usize;
    for (i, &s) in xs.iter().enumerate() {
        let guess = pred.predict()?;
        if guess != s {
            mistakes += 1;
        }
        pred.consume(s)?;
        if (i + 1) % 48 == 0 {
            println!(
                "n = {:>3}: mistake rate {:.3}",
                i + 1,
                mistakes as f64 / (i + 1) as f64
            );
        }
    }
    let dist = pred.distribution()?;
    println!("final conditional distribution (seen symbols + one fresh):");
    for (s, lp) in dist.support.iter().zip(&dist.log_probs) {
        println!("  P({s}) = {:.4}", lp.exp());
    }
    println!(
        "unpredictability rate of the source: {:.4}",
        unpredictability_oracle(&model)?
    );
    Ok(())
}
