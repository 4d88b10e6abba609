//! Seeded synthetic stationary ergodic sources with closed-form entropy
//! and unpredictability oracles. These are the ground truth for the
//! verification battery.
//!
//! Randomness comes from ChaCha12 seeded with a 64-bit seed; replicates
//! use the generator's independent stream counter, so every sample is
//! reproducible from `(model, seed, replicate)` with no cross-replicate
//! coupling. Gaussian variates are produced by the inverse-CDF method on
//! top of the same quantile routine the quantizers use.

use crate::core::Sequence;
use crate::error::{Error, Result};
use crate::prediction::ConditionalDistribution;
use crate::quantization::{normal, ReferenceMeasure};
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// A stationary ergodic source model.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceModel {
    /// I.i.d. draws over `{first_symbol, first_symbol+1, ..}`.
    IidCategorical { probs: Vec<f64>, first_symbol: u64 },
    /// Stationary Markov chain over `{0, .., D-1}` (started from its
    /// stationary distribution; must be irreducible and aperiodic).
    MarkovChain { transition: Vec<Vec<f64>> },
    /// I.i.d. geometric over the naturals: `P(m) = q (1-q)^{m-1}`.
    IidGeometric { q: f64 },
    /// I.i.d. normal.
    IidGaussian { mean: f64, sigma: f64 },
    /// Zero-mean Gaussian AR(1): `X_t = phi X_{t-1} + eps_t`, started from
    /// the stationary marginal `N(0, sigma_eps^2 / (1 - phi^2))`.
    GaussianAr1 { phi: f64, innovation_sigma: f64 },
}

const PROB_SUM_TOL: f64 = 1e-12;

impl SourceModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            SourceModel::IidCategorical { probs, .. } => {
                if probs.is_empty() {
                    return Err(Error::InvalidParameter("empty probability vector".into()));
                }
                if probs.iter().any(|&p| p < 0.0) {
                    return Err(Error::InvalidParameter("negative probability".into()));
                }
                let s: f64 = probs.iter().sum();
                if (s - 1.0).abs() > PROB_SUM_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "probabilities sum to {s}, not 1"
                    )));
                }
                Ok(())
            }
            SourceModel::MarkovChain { transition } => validate_markov(transition),
            SourceModel::IidGeometric { q } => {
                if *q > 0.0 && *q < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "geometric parameter must lie in (0,1), got {q}"
                    )))
                }
            }
            SourceModel::IidGaussian { sigma, .. } => {
                if *sigma > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter("sigma must be positive".into()))
                }
            }
            SourceModel::GaussianAr1 {
                phi,
                innovation_sigma,
            } => {
                if phi.abs() >= 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "AR(1) coefficient must satisfy |phi| < 1, got {phi}"
                    )));
                }
                if *innovation_sigma <= 0.0 {
                    return Err(Error::InvalidParameter(
                        "innovation sigma must be positive".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(
            self,
            SourceModel::IidCategorical { .. }
                | SourceModel::MarkovChain { .. }
                | SourceModel::IidGeometric { .. }
        )
    }

    /// Smallest symbol the model can emit (symbolic models).
    pub fn min_symbol(&self) -> Option<u64> {
        match self {
            SourceModel::IidCategorical { first_symbol, .. } => Some(*first_symbol),
            SourceModel::MarkovChain { .. } => Some(0),
            SourceModel::IidGeometric { .. } => Some(1),
            _ => None,
        }
    }
}

fn validate_markov(transition: &[Vec<f64>]) -> Result<()> {
    let d = transition.len();
    if d == 0 {
        return Err(Error::InvalidParameter("empty transition matrix".into()));
    }
    for row in transition {
        if row.len() != d {
            return Err(Error::InvalidParameter(
                "transition matrix must be square".into(),
            ));
        }
        if row.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidParameter("negative transition".into()));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "transition row sums to {s}, not 1"
            )));
        }
    }
    if !is_irreducible(transition) {
        return Err(Error::InvalidParameter(
            "transition matrix is not irreducible".into(),
        ));
    }
    if period(transition) != 1 {
        return Err(Error::InvalidParameter(
            "transition matrix is periodic".into(),
        ));
    }
    Ok(())
}

fn reachable(transition: &[Vec<f64>], from: usize, reversed: bool) -> Vec<bool> {
    let d = transition.len();
    let mut seen = vec![false; d];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(u) = stack.pop() {
        for v in 0..d {
            let edge = if reversed {
                transition[v][u]
            } else {
                transition[u][v]
            };
            if edge > 0.0 && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

fn is_irreducible(transition: &[Vec<f64>]) -> bool {
    reachable(transition, 0, false).iter().all(|&b| b)
        && reachable(transition, 0, true).iter().all(|&b| b)
}

/// Period of an irreducible chain: gcd of `dist(u) + 1 - dist(v)` over all
/// edges, with BFS distances from state 0.
fn period(transition: &[Vec<f64>]) -> u64 {
    let d = transition.len();
    let mut dist = vec![usize::MAX; d];
    let mut queue = std::collections::VecDeque::from([0usize]);
    dist[0] = 0;
    while let Some(u) = queue.pop_front() {
        for v in 0..d {
            if transition[u][v] > 0.0 && dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g: u64 = 0;
    for u in 0..d {
        for v in 0..d {
            if transition[u][v] > 0.0 {
                let diff = (dist[u] as i64 + 1 - dist[v] as i64).unsigned_abs();
                g = gcd(g, diff);
            }
        }
    }
    g.max(1)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Stationary distribution of an irreducible aperiodic chain, by direct
/// solution of `pi P = pi`, `sum pi = 1` with partial pivoting.
pub fn stationary_distribution(transition: &[Vec<f64>]) -> Result<Vec<f64>> {
    validate_markov(transition)?;
    let d = transition.len();
    // Rows of A: (P^T - I) with the last row replaced by all-ones.
    let mut a = vec![vec![0.0f64; d + 1]; d];
    for r in 0..d {
        for c in 0..d {
            a[r][c] = transition[c][r] - if r == c { 1.0 } else { 0.0 };
        }
    }
    for c in 0..d {
        a[d - 1][c] = 1.0;
    }
    a[d - 1][d] = 1.0;
    // Gaussian elimination.
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-14 {
            return Err(Error::Numerical("singular stationary system".into()));
        }
        a.swap(col, pivot);
        for row in 0..d {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..=d {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    let mut pi: Vec<f64> = (0..d).map(|i| a[i][d] / a[i][i]).collect();
    let s: f64 = pi.iter().sum();
    for p in pi.iter_mut() {
        *p /= s;
    }
    Ok(pi)
}

/// Uniform draw in the open interval `(0, 1)`.
#[inline]
fn uniform01(rng: &mut ChaCha12Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

fn sample_categorical(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u <= acc {
            return i;
        }
    }
    probs.len() - 1
}

/// RNG for `(seed, replicate)`: one ChaCha12 stream per replicate.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Generates `n` observations of the model; reproducible from
/// `(model, seed, replicate)`.
pub fn generate(model: &SourceModel, seed: u64, replicate: u64, n: usize) -> Result<Sequence> {
    model.validate()?;
    let mut rng = replicate_rng(seed, replicate);
    match model {
        SourceModel::IidCategorical {
            probs,
            first_symbol,
        } => {
            let xs = (0..n)
                .map(|_| sample_categorical(probs, uniform01(&mut rng)) as u64 + first_symbol)
                .collect();
            Ok(Sequence::Symbolic(xs))
        }
        SourceModel::MarkovChain { transition } => {
            let pi = stationary_distribution(transition)?;
            let mut xs = Vec::with_capacity(n);
            let mut state = sample_categorical(&pi, uniform01(&mut rng));
            for _ in 0..n {
                xs.push(state as u64);
                state = sample_categorical(&transition[state], uniform01(&mut rng));
            }
            Ok(Sequence::Symbolic(xs))
        }
        SourceModel::IidGeometric { q } => {
            let ln1q = (1.0 - q).ln();
            let xs = (0..n)
                .map(|_| {
                    let u = uniform01(&mut rng);
                    let m = ((1.0 - u).ln() / ln1q).ceil();
                    (m.max(1.0)) as u64
                })
                .collect();
            Ok(Sequence::Symbolic(xs))
        }
        SourceModel::IidGaussian { mean, sigma } => {
            let xs = (0..n)
                .map(|_| *mean + sigma * normal::quantile(uniform01(&mut rng), 0.0, 1.0))
                .collect();
            Ok(Sequence::Real(xs))
        }
        SourceModel::GaussianAr1 {
            phi,
            innovation_sigma,
        } => {
            let marginal_sigma = innovation_sigma / (1.0 - phi * phi).sqrt();
            let mut x = marginal_sigma * normal::quantile(uniform01(&mut rng), 0.0, 1.0);
            let mut xs = Vec::with_capacity(n);
            for _ in 0..n {
                xs.push(x);
                x = phi * x + innovation_sigma * normal::quantile(uniform01(&mut rng), 0.0, 1.0);
            }
            Ok(Sequence::Real(xs))
        }
    }
}

/// Entropy rate in nats: with respect to the counting measure for
/// symbolic models and the Lebesgue measure for real-valued ones.
pub fn entropy_oracle(model: &SourceModel) -> Result<f64> {
    model.validate()?;
    let h = match model {
        SourceModel::IidCategorical { probs, .. } => shannon_entropy(probs),
        SourceModel::MarkovChain { transition } => {
            let pi = stationary_distribution(transition)?;
            pi.iter()
                .zip(transition)
                .map(|(&p, row)| p * shannon_entropy(row))
                .sum()
        }
        SourceModel::IidGeometric { q } => {
            (-q * q.ln() - (1.0 - q) * (1.0 - q).ln()) / q
        }
        SourceModel::IidGaussian { sigma, .. } => {
            0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * sigma * sigma).ln()
        }
        SourceModel::GaussianAr1 {
            innovation_sigma, ..
        } => {
            0.5 * (2.0 * std::f64::consts::PI
                * std::f64::consts::E
                * innovation_sigma
                * innovation_sigma)
                .ln()
        }
    };
    Ok(h)
}

fn shannon_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// Optimal 0-1-loss mistake rate: the expected complement of the maximal
/// conditional probability given the infinite past. Symbolic models only.
pub fn unpredictability_oracle(model: &SourceModel) -> Result<f64> {
    model.validate()?;
    match model {
        SourceModel::IidCategorical { probs, .. } => {
            Ok(1.0 - probs.iter().copied().fold(0.0, f64::max))
        }
        SourceModel::MarkovChain { transition } => {
            let pi = stationary_distribution(transition)?;
            Ok(pi
                .iter()
                .zip(transition)
                .map(|(&p, row)| p * (1.0 - row.iter().copied().fold(0.0, f64::max)))
                .sum())
        }
        SourceModel::IidGeometric { q } => Ok(1.0 - q.max(1.0 - q).max(*q)),
        _ => Err(Error::Unsupported(
            "unpredictability rate is defined for symbolic models".into(),
        )),
    }
}

/// Marginal cross entropy `-sum_m P(m) log mu(m)` in nats for models over
/// the naturals, in closed form where possible and by tail-bounded series
/// summation otherwise.
pub fn cross_entropy_oracle(model: &SourceModel, mu: &ReferenceMeasure) -> Result<f64> {
    model.validate()?;
    let q_mu = match mu {
        ReferenceMeasure::GeometricNaturals { q } => *q,
        _ => {
            return Err(Error::Unsupported(
                "cross entropy oracle expects a countable reference".into(),
            ))
        }
    };
    match model {
        SourceModel::IidCategorical {
            probs,
            first_symbol,
        } => {
            if *first_symbol == 0 {
                return Err(Error::Domain(
                    "model support must lie within the naturals".into(),
                ));
            }
            let mut h = 0.0;
            for (i, &p) in probs.iter().enumerate() {
                if p > 0.0 {
                    h -= p * mu.ln_point_mass(first_symbol + i as u64)?;
                }
            }
            Ok(h)
        }
        // -ln q_mu - ln(1-q_mu) E[m-1] with E[m-1] = (1-q)/q.
        SourceModel::IidGeometric { q } => {
            Ok(-q_mu.ln() - (1.0 - q_mu).ln() * (1.0 - q) / q)
        }
        _ => Err(Error::Unsupported(
            "cross entropy oracle is defined for sources over the naturals".into(),
        )),
    }
}

/// True conditional distribution of the next symbol given the history,
/// where the model admits one in closed form (i.i.d. and Markov models).
pub fn conditional_law(model: &SourceModel, history: &[u64]) -> Option<ConditionalDistribution> {
    match model {
        SourceModel::IidCategorical {
            probs,
            first_symbol,
        } => {
            let support = (0..probs.len() as u64).map(|i| i + first_symbol).collect();
            Some(ConditionalDistribution::from_probs(support, probs))
        }
        SourceModel::MarkovChain { transition } => {
            let d = transition.len() as u64;
            let row = match history.last() {
                Some(&s) if (s as usize) < transition.len() => transition[s as usize].clone(),
                Some(_) => return None,
                None => stationary_distribution(transition).ok()?,
            };
            Some(ConditionalDistribution::from_probs(
                (0..d).collect(),
                &row,
            ))
        }
        SourceModel::IidGeometric { q } => {
            // Truncated representation for metric computations.
            let cap = 64usize;
            let probs: Vec<f64> = (1..=cap)
                .map(|m| q * (1.0 - q).powi(m as i32 - 1))
                .collect();
            Some(ConditionalDistribution::from_probs(
                (1..=cap as u64).collect(),
                &probs,
            ))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bern03() -> SourceModel {
        SourceModel::IidCategorical {
            probs: vec![0.3, 0.7],
            first_symbol: 0,
        }
    }

    fn chain() -> SourceModel {
        SourceModel::MarkovChain {
            transition: vec![vec![0.9, 0.1], vec![0.2, 0.8]],
        }
    }

    #[test]
    fn generation_is_reproducible() {
        for model in [
            bern03(),
            chain(),
            SourceModel::IidGeometric { q: 0.5 },
            SourceModel::IidGaussian {
                mean: 0.0,
                sigma: 1.0,
            },
            SourceModel::GaussianAr1 {
                phi: 0.5,
                innovation_sigma: 1.0,
            },
        ] {
            let a = generate(&model, 42, 3, 257).unwrap();
            let b = generate(&model, 42, 3, 257).unwrap();
            assert_eq!(a, b);
            let c = generate(&model, 42, 4, 257).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn categorical_frequencies_concentrate() {
        let n = 100_000usize;
        let x = generate(&bern03(), 7, 0, n).unwrap();
        let xs = x.as_symbolic().unwrap();
        let f0 = xs.iter().filter(|&&s| s == 0).count() as f64 / n as f64;
        let se = (0.3f64 * 0.7 / n as f64).sqrt();
        assert!((f0 - 0.3).abs() <= 4.0 * se, "f0={f0}");
    }

    #[test]
    fn ar1_autocorrelation() {
        let n = 100_000usize;
        let x = generate(
            &SourceModel::GaussianAr1 {
                phi: 0.5,
                innovation_sigma: 1.0,
            },
            11,
            0,
            n,
        )
        .unwrap();
        let xs = x.as_real().unwrap();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var: f64 = xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let lag1: f64 = xs
            .windows(2)
            .map(|w| (w[0] - mean) * (w[1] - mean))
            .sum::<f64>()
            / (n as f64 - 1.0);
        let rho = lag1 / var;
        assert!((rho - 0.5).abs() <= 0.02, "rho={rho}");
        // Stationary marginal variance is sigma^2 / (1 - phi^2) = 4/3.
        assert!((var - 4.0 / 3.0).abs() <= 0.05, "var={var}");
    }

    #[test]
    fn entropy_oracles() {
        assert!((entropy_oracle(&bern03()).unwrap() - 0.6108643020548935).abs() < 1e-12);
        // (2/3) H(0.1) + (1/3) H(0.2) in nats.
        assert!((entropy_oracle(&chain()).unwrap() - 0.3835227901070281).abs() < 1e-12);
        let h = entropy_oracle(&SourceModel::IidGaussian {
            mean: 0.0,
            sigma: 1.0,
        })
        .unwrap();
        assert!((h - 1.4189385332046727).abs() < 1e-12);
        let h = entropy_oracle(&SourceModel::IidGeometric { q: 0.5 }).unwrap();
        assert!((h - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
        let h = entropy_oracle(&SourceModel::GaussianAr1 {
            phi: 0.5,
            innovation_sigma: 1.0,
        })
        .unwrap();
        assert!((h - 1.4189385332046727).abs() < 1e-12);
    }

    #[test]
    fn unpredictability_oracles() {
        assert!((unpredictability_oracle(&bern03()).unwrap() - 0.3).abs() < 1e-12);
        let u = unpredictability_oracle(&chain()).unwrap();
        assert!((u - (2.0 / 3.0 * 0.1 + 1.0 / 3.0 * 0.2)).abs() < 1e-12);
        assert!(unpredictability_oracle(&SourceModel::IidGaussian {
            mean: 0.0,
            sigma: 1.0
        })
        .is_err());
    }

    #[test]
    fn deterministic_chain_is_rejected() {
        let identity = SourceModel::MarkovChain {
            transition: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        assert!(identity.validate().is_err());
        let periodic = SourceModel::MarkovChain {
            transition: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        };
        assert!(periodic.validate().is_err());
    }

    #[test]
    fn stationary_distribution_example() {
        let pi = stationary_distribution(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((pi[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_examples() {
        let mu = ReferenceMeasure::GeometricNaturals { q: 0.5 };
        // Uniform on {1,2}: (1/2) ln 2 + (1/2) ln 4 = 1.5 ln 2.
        let m = SourceModel::IidCategorical {
            probs: vec![0.5, 0.5],
            first_symbol: 1,
        };
        let h = cross_entropy_oracle(&m, &mu).unwrap();
        assert!((h - 1.5 * std::f64::consts::LN_2).abs() < 1e-12);
        // Matched geometric: cross entropy equals the entropy rate.
        let g = SourceModel::IidGeometric { q: 0.5 };
        let h = cross_entropy_oracle(&g, &mu).unwrap();
        assert!((h - entropy_oracle(&g).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn oracle_matches_monte_carlo() {
        // Plug-in block-1 entropy of a large sample vs the oracle.
        let n = 1_000_000usize;
        let x = generate(&bern03(), 99, 0, n).unwrap();
        let xs = x.as_symbolic().unwrap();
        let ones = xs.iter().filter(|&&s| s == 1).count() as f64 / n as f64;
        let h_emp = -(ones * ones.ln() + (1.0 - ones) * (1.0 - ones).ln());
        let h = entropy_oracle(&bern03()).unwrap();
        // Delta method: sd of plug-in entropy ~ |ln(p/(1-p))| * se(p).
        let se = (0.3f64 * 0.7 / n as f64).sqrt() * (0.7f64 / 0.3).ln().abs();
        assert!((h_emp - h).abs() <= 4.0 * se + 1e-6, "h_emp={h_emp} h={h}");
    }

    #[test]
    fn geometric_inverse_cdf_sampling() {
        let n = 200_000usize;
        let x = generate(&SourceModel::IidGeometric { q: 0.5 }, 5, 0, n).unwrap();
        let xs = x.as_symbolic().unwrap();
        assert!(xs.iter().all(|&m| m >= 1));
        let f1 = xs.iter().filter(|&&m| m == 1).count() as f64 / n as f64;
        let se = (0.5f64 * 0.5 / n as f64).sqrt();
        assert!((f1 - 0.5).abs() <= 4.0 * se);
        let mean = xs.iter().sum::<u64>() as f64 / n as f64;
        assert!((mean - 2.0).abs() <= 0.02, "mean={mean}");
    }

    #[test]
    fn conditional_law_markov() {
        let law = conditional_law(&chain(), &[0, 1]).unwrap();
        assert!((law.prob_of(0) - 0.2).abs() < 1e-12);
        let law = conditional_law(&chain(), &[]).unwrap();
        assert!((law.prob_of(0) - 2.0 / 3.0).abs() < 1e-12);
        assert!(conditional_law(
            &SourceModel::IidGaussian {
                mean: 0.0,
                sigma: 1.0
            },
            &[]
        )
        .is_none());
    }
}
