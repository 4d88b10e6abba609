//! The Cesàro-mean conditional distribution converges to the true
//! conditional law in total variation.
//!
//! ```bash
//! cargo run --example tv_convergence
//! ```

use entrod::core::standard_grid;
use entrod::prediction::{
    total_variation, BaseMeasure, CesaroPredictor, ConditionalDistribution, PredictorConfig,
};
use entrod::sources::{generate, SourceModel};

fn main() -> entrod::Result<()> {
    let model = SourceModel::IidCategorical {
        probs: vec![0.3, 0.7],
        first_symbol: 0,
    };
    let truth = ConditionalDistribution::from_probs(vec![0, 1], &[0.3, 0.7]);
    let n = 4_096;
    let grid = standard_grid(n);
    let data = generate(&model, 99, 0, n)?;
    let xs = data.as_symbolic().unwrap();
    // Exact averaging over all suffix windows.
    let cfg = PredictorConfig::new(BaseMeasure::PpmTotal { alphabet_size: 2 }, None)?;
    let mut pred = CesaroPredictor::new(&cfg)?;
    let mut next = 0usize;
    println!("total variation to the true marginal, Bernoulli(0.3):");
    for (idx, &s) in xs.iter().enumerate() {
        pred.consume(s)?;
        if next < grid.len() && grid[next] == idx + 1 {
            next += 1;
            let est = pred.distribution()?;
            println!(
                "  n = {:>5}: tv = {:.5}  (estimated P(1) = {:.4})",
                idx + 1,
                total_variation(&truth, &est),
                est.prob_of(1)
            );
        }
    }
    Ok(())
}
