//! Shared numeric foundations: log-domain arithmetic, mixture weights,
//! sequences, and the result record carried by every density evaluation.
//!
//! All densities in this crate are computed and stored as natural
//! logarithms. Mixtures of thousands of terms underflow linear-domain
//! doubles once sequences reach a few hundred symbols, so the log domain is
//! the only viable representation; conversion to bits happens at the output
//! boundary.

/// Natural log of the sum of exponentials, shifted by the maximum term.
///
/// Empty input and all-(-inf) input both yield `-inf`. `-inf` terms are
/// ignored; when one term dominates the rest by more than ~745 nats the
/// result equals that term exactly (the remainder underflows).
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = terms.iter().map(|&t| (t - m).exp()).sum();
    m + sum.ln()
}

/// Mixture weight of order `j`: `1/(j+1) - 1/(j+2)`.
///
/// The weights are positive and sum to one over all orders; the telescoping
/// tail has the closed form [`tail_weight`].
pub fn weight(j: usize) -> f64 {
    let j = j as f64;
    1.0 / (j + 1.0) - 1.0 / (j + 2.0)
}

/// Natural log of [`weight`], computed without cancellation:
/// `w_j = 1/((j+1)(j+2))`.
pub fn ln_weight(j: usize) -> f64 {
    let j = j as f64;
    -((j + 1.0).ln() + (j + 2.0).ln())
}

/// Total weight of all orders `>= j`: `1/(j+1)`.
pub fn tail_weight(j: usize) -> f64 {
    1.0 / (j as f64 + 1.0)
}

/// Natural log of [`tail_weight`].
pub fn ln_tail_weight(j: usize) -> f64 {
    -((j as f64 + 1.0).ln())
}

/// A finite sample, either symbol-valued or real-valued.
///
/// The kind is fixed at construction. Symbolic values are nonnegative
/// integers; whether they fit a declared alphabet is checked by the
/// operations that require one.
#[derive(Debug, Clone, PartialEq)]
pub enum Sequence {
    Symbolic(Vec<u64>),
    Real(Vec<f64>),
}

impl Sequence {
    pub fn len(&self) -> usize {
        match self {
            Sequence::Symbolic(v) => v.len(),
            Sequence::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> SequenceKind {
        match self {
            Sequence::Symbolic(_) => SequenceKind::Symbolic,
            Sequence::Real(_) => SequenceKind::Real,
        }
    }

    pub fn as_symbolic(&self) -> Option<&[u64]> {
        match self {
            Sequence::Symbolic(v) => Some(v),
            Sequence::Real(_) => None,
        }
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            Sequence::Real(v) => Some(v),
            Sequence::Symbolic(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    Symbolic,
    Real,
}

/// A natural-log density value together with truncation diagnostics.
///
/// `truncation_level` is the number of mixture terms that were evaluated
/// genuinely before the closed-form tail (orders for Markov mixtures,
/// levels for quantization mixtures). When `tail_exact` is true the value
/// is the exact infinite mixture and `tail_error_bound_log` is `None`;
/// otherwise the bound is a natural-log upper bound on the absolute error
/// of the linear-domain density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDensity {
    pub log_value: f64,
    pub truncation_level: usize,
    pub tail_exact: bool,
    pub tail_error_bound_log: Option<f64>,
}

impl LogDensity {
    pub fn exact(log_value: f64, truncation_level: usize) -> Self {
        LogDensity {
            log_value,
            truncation_level,
            tail_exact: true,
            tail_error_bound_log: None,
        }
    }

    pub fn bounded(log_value: f64, truncation_level: usize, tail_error_bound_log: f64) -> Self {
        LogDensity {
            log_value,
            truncation_level,
            tail_exact: false,
            tail_error_bound_log: Some(tail_error_bound_log),
        }
    }
}

/// Default grid of report points: powers of two from 16 up to `n_max`,
/// always including `n_max` itself.
pub fn standard_grid(n_max: usize) -> Vec<usize> {
    let mut grid = Vec::new();
    let mut n = 16usize;
    while n <= n_max {
        grid.push(n);
        match n.checked_mul(2) {
            Some(next) => n = next,
            None => break,
        }
    }
    if grid.last() != Some(&n_max) {
        grid.push(n_max);
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn log_sum_exp_basics() {
        let half = 0.5f64.ln();
        assert!((log_sum_exp(&[half, half]) - 0.0).abs() < 1e-15);
        assert_eq!(log_sum_exp(&[0.0]), 0.0);
        // Analytic identity for deeply shifted terms.
        let expect = -1000.0 + 2.0f64.ln();
        assert!((log_sum_exp(&[-1000.0, -1000.0]) - expect).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(
            log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            f64::NEG_INFINITY
        );
        // One dominating term: result is exactly that term.
        assert_eq!(log_sum_exp(&[0.0, -800.0]), 0.0);
    }

    #[test]
    fn weights_sum_to_one_with_tail() {
        assert_eq!(weight(0), 0.5);
        assert_eq!(tail_weight(0), 1.0);
        assert!((tail_weight(3) - 0.25).abs() < 1e-15);
        for cap in [1usize, 7, 100, 10_000] {
            let partial: f64 = (0..cap).map(weight).sum();
            assert!(
                (partial + tail_weight(cap) - 1.0).abs() <= 1e-12,
                "cap {cap}"
            );
        }
    }

    #[test]
    fn ln_weight_matches_weight() {
        for j in 0..200 {
            assert!((ln_weight(j) - weight(j).ln()).abs() < 1e-12);
            assert!((ln_tail_weight(j) - tail_weight(j).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_shape() {
        assert_eq!(standard_grid(16), vec![16]);
        assert_eq!(standard_grid(100), vec![16, 32, 64, 100]);
        assert_eq!(standard_grid(128), vec![16, 32, 64, 128]);
    }

    proptest! {
        #[test]
        fn log_sum_exp_permutation_invariant(mut xs in proptest::collection::vec(-500.0f64..500.0, 1..20)) {
            let a = log_sum_exp(&xs);
            xs.reverse();
            let b = log_sum_exp(&xs);
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }

        #[test]
        fn log_sum_exp_monotone(xs in proptest::collection::vec(-300.0f64..300.0, 1..12), idx in 0usize..12, bump in 0.01f64..5.0) {
            let idx = idx % xs.len();
            let a = log_sum_exp(&xs);
            let mut ys = xs.clone();
            ys[idx] += bump;
            let b = log_sum_exp(&ys);
            // Weakly monotone always; strictly when the bumped term is
            // within float reach of the maximum.
            prop_assert!(b >= a);
            let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if m - xs[idx] < 30.0 {
                prop_assert!(b > a);
            }
        }
    }
}
