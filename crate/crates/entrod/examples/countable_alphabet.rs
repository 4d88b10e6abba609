//! Entropy over a countably infinite alphabet: the corrected estimator
//! under a geometric reference, the sample-optimal (level, order) pair,
//! and the optimal-pair sandwich bound.
//!
//! ```bash
//! cargo run --example countable_alphabet
//! ```

use entrod::core::{ln_weight, standard_grid, Sequence};
use entrod::npd::{
    corrected_countable_estimate, optimal_orders, ppm_qr_estimate, total_log_density, NpdConfig,
};
use entrod::quantization::{PartitionScheme, ReferenceMeasure};
use entrod::sources::{entropy_oracle, generate, SourceModel};

fn main() -> entrod::Result<()> {
    let model = SourceModel::IidGeometric { q: 0.5 };
    let n = 1 << 14;
    let data = generate(&model, 5, 0, n)?;
    let xs = data.as_symbolic().unwrap().to_vec();
    let cfg = NpdConfig::new(
        PartitionScheme::IncrementalNaturals,
        ReferenceMeasure::GeometricNaturals { q: 0.5 },
    )?;
    let grid = standard_grid(n);
    let corrected = corrected_countable_estimate(&xs, &cfg, &grid)?;
    let qr = ppm_qr_estimate(&xs, &cfg, &grid)?;
    let oracle = entropy_oracle(&model)?;
    println!("geometric(1/2) source, true entropy rate {oracle:.6} nats");
    println!(
        "{:>8}  {:>10}  {:>10}  {:>4}  {:>4}  {:>8}",
        "n", "corrected", "qr-est", "Q_n", "R_n", "C_n"
    );
    for (c, q) in corrected.points.iter().zip(&qr.points) {
        println!(
            "{:>8}  {:>10.6}  {:>10.6}  {:>4}  {:>4}  {:>8.4}",
            c.n,
            c.estimate_nats,
            q.estimate_nats,
            q.q_n.unwrap(),
            q.r_n.unwrap(),
            q.correction_nats
        );
    }
    // Sandwich: the mixture density and its best single term differ by at
    // most the two mixture weights.
    let oo = optimal_orders(&xs, &cfg)?;
    let total = total_log_density(&Sequence::Symbolic(xs), &cfg)?
        .density
        .log_value;
    let gap = -total + oo.objective_log;
    let cap = -ln_weight(oo.quantization_level as usize) - ln_weight(oo.markov_order);
    println!(
        "sandwich at n = {n}: 0 <= {gap:.3} <= {cap:.3} (Q = {}, R = {})",
        oo.quantization_level, oo.markov_order
    );
    Ok(())
}
