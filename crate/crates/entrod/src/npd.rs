//! Quantization-mixture densities and entropy rate estimators.
//!
//! The level-`l` density of a sample is the finite-alphabet Markov mixture
//! evaluated on the level-`l` quantized string, divided by the product of
//! reference cell masses. The total density mixes all levels with the
//! weights `w_l = 1/(l+1) - 1/(l+2)`.
//!
//! Truncation policy per scheme:
//!
//! - **Finite alphabet**: every level is the full partition, so the mixture
//!   collapses to a single exact term.
//! - **Dyadic / quantile-dyadic**: cells carry mass `2^{-l}`, and once the
//!   level separates all sample points the level density approaches 1 from
//!   below. Levels below the separating level plus a margin are evaluated
//!   genuinely; the remainder is priced at the uniform value 1, which
//!   overstates each term by at most `n(n-1)/2^{l+2}`, and the recorded
//!   error bound accounts for the substitution. Samples with ties never
//!   separate; the search saturates at the level cap and the result is
//!   flagged as a plain lower bound.
//! - **Incremental naturals**: the alphabet grows with the level and no
//!   closed-form tail exists. Levels up to `max(x) + margin` are summed
//!   and the result is flagged as a certified lower bound on the density
//!   (hence an upper bound on the entropy estimate).
//!
//! Estimators: the plain rate `-log density / n`; the countable-alphabet
//! estimator corrected by the empirical reference cross-entropy; the
//! quantized-model estimator at the sample-optimal (level, order) pair
//! with its tail-mass correction; and the Gaussian-reference corrected
//! estimator of differential entropy rate, with an experimental plug-in
//! variant that re-fits the reference moments per prefix.

use crate::core::{ln_tail_weight, ln_weight, log_sum_exp, LogDensity, Sequence};
use crate::error::{Error, Result};
use crate::ppm::{PpmMixture, PpmParams};
use crate::quantization::{
    cell_ln_mass, quantize, quantize_paths, separating_level_of_paths, Cell, PartitionScheme,
    Point, ReferenceMeasure, SeparatingLevel,
};

const LN_2: f64 = std::f64::consts::LN_2;

/// Configuration of a quantization-mixture density.
#[derive(Debug, Clone, PartialEq)]
pub struct NpdConfig {
    pub scheme: PartitionScheme,
    pub reference: ReferenceMeasure,
    /// Cap for the separating-level search (dyadic schemes).
    pub level_cap: u32,
    /// Extra genuinely-evaluated levels past the separating level or the
    /// maximum observed symbol.
    pub margin: u32,
}

impl NpdConfig {
    pub fn new(scheme: PartitionScheme, reference: ReferenceMeasure) -> Result<Self> {
        let cfg = NpdConfig {
            scheme,
            reference,
            level_cap: 40,
            margin: 4,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_level_cap(mut self, level_cap: u32) -> Result<Self> {
        self.level_cap = level_cap;
        self.validate()?;
        Ok(self)
    }

    pub fn with_margin(mut self, margin: u32) -> Result<Self> {
        self.margin = margin;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.reference.validate()?;
        if self.level_cap < 1 {
            return Err(Error::InvalidParameter("level cap must be >= 1".into()));
        }
        if self.level_cap as u64 + self.margin as u64 > 60 {
            return Err(Error::InvalidParameter(
                "level cap plus margin must not exceed 60".into(),
            ));
        }
        match (&self.scheme, &self.reference) {
            (
                PartitionScheme::TrivialFinite { alphabet_size: a },
                ReferenceMeasure::CountingFinite { alphabet_size: b },
            ) if a == b => Ok(()),
            (PartitionScheme::DyadicUnit, ReferenceMeasure::UniformUnit) => Ok(()),
            (
                PartitionScheme::QuantileDyadic { mean: qm, sigma: qs },
                ReferenceMeasure::Gaussian { mean, sigma },
            ) if qm == mean && qs == sigma => Ok(()),
            (PartitionScheme::IncrementalNaturals, ReferenceMeasure::GeometricNaturals { .. }) => {
                Ok(())
            }
            (s, r) => Err(Error::Config(format!(
                "partition scheme {s:?} is incompatible with reference measure {r:?}"
            ))),
        }
    }
}

/// One level of the mixture: `log NPD^l = log R^l(x^l) - sum_i log mu(x_i^l)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelTerm {
    pub level: u32,
    pub ln_npd: f64,
    pub ln_universal: f64,
    pub ln_cell_masses: f64,
}

/// Status flags attached to density evaluations and estimates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunFlags {
    /// The separating-level search hit the cap (ties in the data).
    pub saturated: bool,
    /// The value is a certified lower bound on the density (the entropy
    /// estimate derived from it is an upper bound).
    pub lower_bound: bool,
    /// Produced by the plug-in reference mode, which carries no
    /// consistency guarantee.
    pub experimental: bool,
}

impl RunFlags {
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.saturated {
            parts.push("saturated");
        }
        if self.lower_bound {
            parts.push("lower-bound");
        }
        if self.experimental {
            parts.push("experimental");
        }
        parts.join("+")
    }
}

/// A total mixture density with its evaluation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpdDensity {
    pub density: LogDensity,
    pub levels_used: usize,
    pub separating_level: Option<SeparatingLevel>,
    pub flags: RunFlags,
}

/// Sample-optimal quantization level and Markov order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalOrders {
    pub quantization_level: u64,
    pub markov_order: usize,
    /// `log [ PPM^{q+1}_r(x^q) / prod mu(x_i^q) ]` at the optimum.
    pub objective_log: f64,
}

/// One grid point of an estimate trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub n: usize,
    /// Entropy rate estimate in nats.
    pub estimate_nats: f64,
    /// Correction term included in the estimate (tail-mass or second
    /// moment), in nats; zero when the estimator has none.
    pub correction_nats: f64,
    pub q_n: Option<u64>,
    pub r_n: Option<usize>,
    pub levels_used: usize,
    pub separating_level: Option<SeparatingLevel>,
    pub flags: RunFlags,
}

/// Estimates along a grid of sample sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateTrajectory {
    pub grid: Vec<usize>,
    pub points: Vec<TrajectoryPoint>,
}

fn validate_grid(grid: &[usize], n: usize) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty report grid".into()));
    }
    let mut last = 0usize;
    for &g in grid {
        if g == 0 || (g <= last && last != 0) {
            return Err(Error::InvalidParameter(
                "report grid must be strictly increasing and positive".into(),
            ));
        }
        if g > n {
            return Err(Error::InvalidParameter(format!(
                "grid point {g} exceeds sample length {n}"
            )));
        }
        last = g;
    }
    Ok(())
}

/// Level-`l` density of a sample.
pub fn level_log_density(x: &Sequence, level: u32, cfg: &NpdConfig) -> Result<LevelTerm> {
    cfg.validate()?;
    let d = cfg.scheme.alphabet_size(level);
    let params = PpmParams::new(d)?;
    let mut mix = PpmMixture::new(params);
    let mut ln_mass = 0.0;
    match x {
        Sequence::Symbolic(v) => {
            for &s in v {
                let cell = quantize(Point::Symbol(s), level, &cfg.scheme)?;
                mix.append(cell.index)?;
                ln_mass += cell_ln_mass(cell, &cfg.reference, &cfg.scheme)?;
            }
        }
        Sequence::Real(v) => {
            for &r in v {
                let cell = quantize(Point::Real(r), level, &cfg.scheme)?;
                mix.append(cell.index)?;
                ln_mass += cell_ln_mass(cell, &cfg.reference, &cfg.scheme)?;
            }
        }
    }
    let ln_universal = mix.total_log();
    Ok(LevelTerm {
        level,
        ln_npd: ln_universal - ln_mass,
        ln_universal,
        ln_cell_masses: ln_mass,
    })
}

/// Total mixture density of a sample.
pub fn total_log_density(x: &Sequence, cfg: &NpdConfig) -> Result<NpdDensity> {
    cfg.validate()?;
    match (&cfg.scheme, x) {
        (PartitionScheme::TrivialFinite { .. }, Sequence::Symbolic(v)) => finite_total(v, cfg),
        (PartitionScheme::IncrementalNaturals, Sequence::Symbolic(v)) => countable_total(v, cfg),
        (
            PartitionScheme::DyadicUnit | PartitionScheme::QuantileDyadic { .. },
            Sequence::Real(v),
        ) => {
            let depth = (cfg.level_cap + cfg.margin).min(60);
            let paths = quantize_paths(v, depth, &cfg.scheme)?;
            real_total_from_paths(&paths, depth, cfg)
        }
        _ => Err(Error::Config(
            "sequence kind does not match the partition scheme".into(),
        )),
    }
}

/// Finite alphabet: every level is the full partition, so the level terms
/// coincide and the mixture is a single exact term.
fn finite_total(v: &[u64], cfg: &NpdConfig) -> Result<NpdDensity> {
    let d = cfg.scheme.alphabet_size(0);
    let mut mix = PpmMixture::new(PpmParams::new(d)?);
    for &s in v {
        mix.append(s)?;
    }
    // Counting reference: cell masses are 1.
    Ok(NpdDensity {
        density: LogDensity::exact(mix.total_log(), 1),
        levels_used: 1,
        separating_level: None,
        flags: RunFlags::default(),
    })
}

/// Incremental-naturals mixture truncated at `max(x) + margin`; a
/// certified lower bound on the density.
fn countable_total(v: &[u64], cfg: &NpdConfig) -> Result<NpdDensity> {
    if v.iter().any(|&s| s == 0) {
        return Err(Error::Domain(
            "incremental scheme is defined over naturals >= 1".into(),
        ));
    }
    let max_sym = v.iter().copied().max().unwrap_or(1);
    let top_level = (max_sym + cfg.margin as u64).min(u32::MAX as u64) as u32;
    let mut terms = Vec::with_capacity(top_level as usize + 1);
    for l in 0..=top_level {
        let t = countable_level_term(v, l, cfg)?;
        terms.push(ln_weight(l as usize) + t);
    }
    let total = log_sum_exp(&terms);
    Ok(NpdDensity {
        density: LogDensity {
            log_value: total,
            truncation_level: top_level as usize + 1,
            tail_exact: false,
            tail_error_bound_log: None,
        },
        levels_used: top_level as usize + 1,
        separating_level: None,
        flags: RunFlags {
            lower_bound: true,
            ..RunFlags::default()
        },
    })
}

fn countable_level_term(v: &[u64], level: u32, cfg: &NpdConfig) -> Result<f64> {
    let d = level as u64 + 1;
    let mut mix = PpmMixture::new(PpmParams::new(d)?);
    let mut ln_mass = 0.0;
    for &s in v {
        let cell = Cell {
            level,
            index: s.min(d) - 1,
        };
        mix.append(cell.index)?;
        ln_mass += cell_ln_mass(cell, &cfg.reference, &cfg.scheme)?;
    }
    Ok(mix.total_log() - ln_mass)
}

/// Dyadic/quantile mixture from precomputed bit paths. Genuine terms for
/// levels below the separating level plus margin, uniform closed-form tail
/// beyond, with the substitution error recorded.
fn real_total_from_paths(paths: &[u64], depth: u32, cfg: &NpdConfig) -> Result<NpdDensity> {
    let n = paths.len();
    let sep = separating_level_within_cap(paths, depth, cfg.level_cap);
    let (lambda, saturated) = match sep {
        SeparatingLevel::Level(m) => ((m + cfg.margin).min(depth), false),
        SeparatingLevel::Saturated => (depth, true),
    };
    let mut terms = Vec::with_capacity(lambda as usize + 1);
    for l in 0..lambda {
        let d = 1u64 << l;
        let mut mix = PpmMixture::new(PpmParams::new(d)?);
        for &p in paths {
            mix.append(p >> (depth - l))?;
        }
        // Cell masses are exactly 2^{-l} in the dyadic construction.
        let ln_npd = mix.total_log() + (n as f64) * (l as f64) * LN_2;
        terms.push(ln_weight(l as usize) + ln_npd);
    }
    // Tail: every level >= lambda priced at the uniform value 1.
    terms.push(ln_tail_weight(lambda as usize));
    let total = log_sum_exp(&terms);
    let density = if saturated {
        LogDensity {
            log_value: total,
            truncation_level: lambda as usize,
            tail_exact: false,
            tail_error_bound_log: None,
        }
    } else {
        // Per-level substitution gap for separated samples is at most
        // n(n-1)/2^{l+2}; weighted and summed over the tail this is
        // tail_weight(lambda) * min(1, n(n-1)/2^{lambda+2}).
        let ln_gap = if n >= 2 {
            ((n as f64) * (n as f64 - 1.0)).ln() - (lambda as f64 + 2.0) * LN_2
        } else {
            f64::NEG_INFINITY
        };
        let bound = ln_tail_weight(lambda as usize) + ln_gap.min(0.0);
        LogDensity::bounded(total, lambda as usize, bound)
    };
    Ok(NpdDensity {
        density,
        levels_used: lambda as usize,
        separating_level: Some(sep),
        flags: RunFlags {
            saturated,
            lower_bound: saturated,
            ..RunFlags::default()
        },
    })
}

/// Separating level with saturation measured against `level_cap` rather
/// than the full stored depth.
fn separating_level_within_cap(paths: &[u64], depth: u32, level_cap: u32) -> SeparatingLevel {
    let cap = level_cap.min(depth);
    let capped: Vec<u64> = paths.iter().map(|&p| p >> (depth - cap)).collect();
    separating_level_of_paths(&capped, cap)
}

/// Plain entropy rate estimate `-log density / n` along a grid.
pub fn entropy_rate_estimate(
    x: &Sequence,
    cfg: &NpdConfig,
    grid: &[usize],
) -> Result<EstimateTrajectory> {
    cfg.validate()?;
    validate_grid(grid, x.len())?;
    let mut points = Vec::with_capacity(grid.len());
    match (&cfg.scheme, x) {
        (
            PartitionScheme::DyadicUnit | PartitionScheme::QuantileDyadic { .. },
            Sequence::Real(v),
        ) => {
            let depth = (cfg.level_cap + cfg.margin).min(60);
            let paths = quantize_paths(v, depth, &cfg.scheme)?;
            for &n in grid {
                let d = real_total_from_paths(&paths[..n], depth, cfg)?;
                points.push(point_from_density(
                    n,
                    &d,
                    -d.density.log_value / n as f64,
                    0.0,
                ));
            }
        }
        _ => {
            for &n in grid {
                let prefix = prefix_of(x, n);
                let d = total_log_density(&prefix, cfg)?;
                points.push(point_from_density(
                    n,
                    &d,
                    -d.density.log_value / n as f64,
                    0.0,
                ));
            }
        }
    }
    Ok(EstimateTrajectory {
        grid: grid.to_vec(),
        points,
    })
}

fn prefix_of(x: &Sequence, n: usize) -> Sequence {
    match x {
        Sequence::Symbolic(v) => Sequence::Symbolic(v[..n].to_vec()),
        Sequence::Real(v) => Sequence::Real(v[..n].to_vec()),
    }
}

fn point_from_density(n: usize, d: &NpdDensity, estimate: f64, correction: f64) -> TrajectoryPoint {
    TrajectoryPoint {
        n,
        estimate_nats: estimate,
        correction_nats: correction,
        q_n: None,
        r_n: None,
        levels_used: d.levels_used,
        separating_level: d.separating_level,
        flags: d.flags,
    }
}

/// Countable-alphabet entropy estimator: the mixture rate corrected by the
/// empirical reference cross-entropy, estimating the entropy rate with
/// respect to the counting measure.
pub fn corrected_countable_estimate(
    x: &[u64],
    cfg: &NpdConfig,
    grid: &[usize],
) -> Result<EstimateTrajectory> {
    cfg.validate()?;
    require_incremental(cfg)?;
    validate_grid(grid, x.len())?;
    let mut points = Vec::with_capacity(grid.len());
    for &n in grid {
        let prefix = &x[..n];
        let d = countable_total(prefix, cfg)?;
        let mut ln_mu = 0.0;
        for &s in prefix {
            ln_mu += cfg.reference.ln_point_mass(s)?;
        }
        let est = (-d.density.log_value - ln_mu) / n as f64;
        points.push(point_from_density(n, &d, est, 0.0));
    }
    Ok(EstimateTrajectory {
        grid: grid.to_vec(),
        points,
    })
}

fn require_incremental(cfg: &NpdConfig) -> Result<()> {
    match cfg.scheme {
        PartitionScheme::IncrementalNaturals => Ok(()),
        _ => Err(Error::Config(
            "this estimator requires the incremental-naturals scheme".into(),
        )),
    }
}

/// Maximizes `log PPM^{q+1}_r(x^q) - sum_i log mu(x_i^q)` over levels
/// `q <= max(x)` and orders `r <= n-1`; ties break to the smallest level,
/// then the smallest order. Orders beyond the quantized repetition length
/// plus one all share the uniform value, so the search is finite.
pub fn optimal_orders(x: &[u64], cfg: &NpdConfig) -> Result<OptimalOrders> {
    cfg.validate()?;
    require_incremental(cfg)?;
    if x.is_empty() {
        return Err(Error::InvalidParameter(
            "optimal orders need a nonempty sample".into(),
        ));
    }
    if x.iter().any(|&s| s == 0) {
        return Err(Error::Domain(
            "incremental scheme is defined over naturals >= 1".into(),
        ));
    }
    let n = x.len();
    let max_sym = *x.iter().max().unwrap();
    let mut best: Option<OptimalOrders> = None;
    for q in 0..=max_sym {
        let level = q as u32;
        let d = q + 1;
        let mut mix = PpmMixture::new(PpmParams::new(d)?);
        let mut ln_mass = 0.0;
        for &s in x {
            let cell = Cell {
                level,
                index: s.min(d) - 1,
            };
            mix.append(cell.index)?;
            ln_mass += cell_ln_mass(cell, &cfg.reference, &cfg.scheme)?;
        }
        let r_top = (mix.active_orders()).min(n.saturating_sub(1));
        for r in 0..=r_top {
            let objective = mix.order_log(r) - ln_mass;
            let better = match &best {
                None => true,
                Some(b) => objective > b.objective_log + 1e-12,
            };
            if better {
                best = Some(OptimalOrders {
                    quantization_level: q,
                    markov_order: r,
                    objective_log: objective,
                });
            }
        }
    }
    Ok(best.expect("nonempty search space"))
}

/// Entropy estimator from the quantized model at the sample-optimal
/// (level, order), corrected by the tail mass term
/// `C_n(q) = -sum_i 1[x_i > q] log mu(x_i | x_i > q) >= 0`.
pub fn ppm_qr_estimate(x: &[u64], cfg: &NpdConfig, grid: &[usize]) -> Result<EstimateTrajectory> {
    cfg.validate()?;
    require_incremental(cfg)?;
    validate_grid(grid, x.len())?;
    let mut points = Vec::with_capacity(grid.len());
    for &n in grid {
        let prefix = &x[..n];
        let oo = optimal_orders(prefix, cfg)?;
        let q = oo.quantization_level;
        let d = q + 1;
        let mut mix = PpmMixture::new(PpmParams::new(d)?);
        for &s in prefix {
            mix.append(s.min(d) - 1)?;
        }
        let ln_ppm_qr = mix.order_log(oo.markov_order);
        let c_n = tail_mass_correction(prefix, q, &cfg.reference, &cfg.scheme)?;
        let est = (-ln_ppm_qr + c_n) / n as f64;
        points.push(TrajectoryPoint {
            n,
            estimate_nats: est,
            correction_nats: c_n,
            q_n: Some(q),
            r_n: Some(oo.markov_order),
            levels_used: q as usize + 1,
            separating_level: None,
            flags: RunFlags::default(),
        });
    }
    Ok(EstimateTrajectory {
        grid: grid.to_vec(),
        points,
    })
}

/// `C_n(q)`: total log-mass lost by lumping symbols above `q` into the
/// tail cell. Nonnegative; zero when every symbol is `<= q`.
pub fn tail_mass_correction(
    x: &[u64],
    q: u64,
    reference: &ReferenceMeasure,
    scheme: &PartitionScheme,
) -> Result<f64> {
    let tail_cell = Cell {
        level: q as u32,
        index: q,
    };
    let ln_tail = cell_ln_mass(tail_cell, reference, scheme)?;
    let mut c = 0.0;
    for &s in x {
        if s > q {
            c -= reference.ln_point_mass(s)? - ln_tail;
        }
    }
    Ok(c)
}

/// Differential entropy rate estimator with a Gaussian reference:
/// `(1/n)[-log density + sum (x_i - m)^2 / (2 sigma^2)] + log(sigma sqrt(2 pi))`.
pub fn gaussian_corrected_estimate(
    x: &[f64],
    cfg: &NpdConfig,
    grid: &[usize],
) -> Result<EstimateTrajectory> {
    cfg.validate()?;
    let (mean, sigma) = match cfg.reference {
        ReferenceMeasure::Gaussian { mean, sigma } => (mean, sigma),
        _ => {
            return Err(Error::Config(
                "gaussian corrected estimator requires a gaussian reference".into(),
            ))
        }
    };
    validate_grid(grid, x.len())?;
    let depth = (cfg.level_cap + cfg.margin).min(60);
    let paths = quantize_paths(x, depth, &cfg.scheme)?;
    let ln_norm = sigma.ln() + 0.5 * (2.0 * std::f64::consts::PI).ln();
    let mut points = Vec::with_capacity(grid.len());
    let mut second_moment = 0.0;
    let mut consumed = 0usize;
    for &n in grid {
        for &v in &x[consumed..n] {
            let z = (v - mean) / sigma;
            second_moment += 0.5 * z * z;
        }
        consumed = n;
        let d = real_total_from_paths(&paths[..n], depth, cfg)?;
        let correction = second_moment / n as f64;
        let est = (-d.density.log_value) / n as f64 + correction + ln_norm;
        points.push(point_from_density(n, &d, est, correction));
    }
    Ok(EstimateTrajectory {
        grid: grid.to_vec(),
        points,
    })
}

/// Plug-in variant: reference moments re-fitted from each prefix, with
/// re-quantization per grid point. Experimental; no consistency guarantee.
pub fn plugin_gaussian_estimate(
    x: &[f64],
    cfg: &NpdConfig,
    grid: &[usize],
) -> Result<EstimateTrajectory> {
    cfg.validate()?;
    match cfg.scheme {
        PartitionScheme::QuantileDyadic { .. } => {}
        _ => {
            return Err(Error::Config(
                "plug-in estimator requires the quantile-dyadic scheme".into(),
            ))
        }
    }
    validate_grid(grid, x.len())?;
    if grid.iter().any(|&n| n < 2) {
        return Err(Error::InvalidParameter(
            "plug-in estimator needs n >= 2".into(),
        ));
    }
    let mut points = Vec::with_capacity(grid.len());
    for &n in grid {
        let prefix = &x[..n];
        let m_n = prefix.iter().sum::<f64>() / n as f64;
        let var_n = prefix.iter().map(|v| (v - m_n).powi(2)).sum::<f64>() / n as f64;
        if var_n <= 0.0 {
            return Err(Error::Numerical(
                "zero sample variance: plug-in reference is degenerate".into(),
            ));
        }
        let sigma_n = var_n.sqrt();
        let sub = NpdConfig {
            scheme: PartitionScheme::QuantileDyadic {
                mean: m_n,
                sigma: sigma_n,
            },
            reference: ReferenceMeasure::Gaussian {
                mean: m_n,
                sigma: sigma_n,
            },
            level_cap: cfg.level_cap,
            margin: cfg.margin,
        };
        let traj = gaussian_corrected_estimate(prefix, &sub, &[n])?;
        let mut p = traj.points[0];
        p.flags.experimental = true;
        points.push(p);
    }
    Ok(EstimateTrajectory {
        grid: grid.to_vec(),
        points,
    })
}
