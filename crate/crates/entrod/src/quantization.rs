//! Nested partition filtrations, quantizers, and reference measures.
//!
//! A partition scheme is a sequence of finite partitions of the alphabet,
//! each refining the previous one. Level-`l` quantization maps a point to
//! the index of its cell. Four schemes are provided:
//!
//! - `TrivialFinite(D)`: a finite alphabet, fully resolved at every level.
//! - `DyadicUnit`: the unit interval `(0, 1]` split into `2^l` left-open
//!   right-closed bins, the bin of `x` being `ceil(2^l x) - 1`.
//! - `QuantileDyadic`: the real line split at Gaussian quantiles of dyadic
//!   fractions, so each level-`l` cell carries reference mass exactly
//!   `2^{-l}`.
//! - `IncrementalNaturals`: level `l` resolves `{1}, .., {l}` as singletons
//!   and lumps `{l+1, l+2, ..}` into one tail cell.
//!
//! The separating level of a sample is the least level at which all points
//! land in distinct cells; beyond it, quantized strings are repetition-free
//! and per-level densities collapse into closed form.

use crate::error::{Error, Result};

pub mod normal;

/// A nested filtration of finite partitions.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionScheme {
    /// Finite alphabet `{0, .., D-1}`; every level is the full partition.
    TrivialFinite { alphabet_size: u64 },
    /// Dyadic bins of the unit interval `(0, 1]`.
    DyadicUnit,
    /// Dyadic bins in probability space of a Gaussian reference CDF.
    QuantileDyadic { mean: f64, sigma: f64 },
    /// `{{1}, .., {l}, {l+1, l+2, ..}}` over the naturals.
    IncrementalNaturals,
}

impl PartitionScheme {
    /// Number of cells in the level-`l` partition.
    pub fn alphabet_size(&self, level: u32) -> u64 {
        match self {
            PartitionScheme::TrivialFinite { alphabet_size } => *alphabet_size,
            PartitionScheme::DyadicUnit | PartitionScheme::QuantileDyadic { .. } => {
                1u64 << level.min(63)
            }
            PartitionScheme::IncrementalNaturals => level as u64 + 1,
        }
    }
}

/// One cell of a level-`l` partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub level: u32,
    pub index: u64,
}

/// A point of the scheme's domain, for quantization.
#[derive(Debug, Clone, Copy)]
pub enum Point {
    Symbol(u64),
    Real(f64),
}

/// Maps a point to its level-`l` cell.
pub fn quantize(point: Point, level: u32, scheme: &PartitionScheme) -> Result<Cell> {
    match (scheme, point) {
        (PartitionScheme::TrivialFinite { alphabet_size }, Point::Symbol(s)) => {
            if s >= *alphabet_size {
                return Err(Error::SymbolOutOfRange {
                    symbol: s,
                    alphabet_size: *alphabet_size,
                });
            }
            Ok(Cell { level, index: s })
        }
        (PartitionScheme::DyadicUnit, Point::Real(x)) => {
            if !(x > 0.0 && x <= 1.0) {
                return Err(Error::Domain(format!(
                    "dyadic scheme requires points in (0, 1], got {x}"
                )));
            }
            Ok(Cell {
                level,
                index: dyadic_bits(x, level.min(63)),
            })
        }
        (PartitionScheme::QuantileDyadic { mean, sigma }, Point::Real(x)) => {
            if !x.is_finite() {
                return Err(Error::Domain(format!("non-finite real point {x}")));
            }
            Ok(Cell {
                level,
                index: quantile_path(x, level.min(63), *mean, *sigma),
            })
        }
        (PartitionScheme::IncrementalNaturals, Point::Symbol(s)) => {
            if s == 0 {
                return Err(Error::Domain(
                    "incremental scheme is defined over naturals >= 1".into(),
                ));
            }
            Ok(Cell {
                level,
                index: s.min(level as u64 + 1) - 1,
            })
        }
        _ => Err(Error::Config(
            "point kind does not match the partition scheme's domain".into(),
        )),
    }
}

/// Dyadic cell index of `x` in `(0, 1]` at depth `level`, derived from one
/// deep quantization so that levels nest exactly: the level-`l` index is
/// the top `l` bits of the deepest index.
fn dyadic_bits(x: f64, level: u32) -> u64 {
    if level == 0 {
        return 0;
    }
    let scaled = (x * (1u64 << level) as f64).ceil();
    let idx = (scaled as u64).clamp(1, 1u64 << level) - 1;
    idx
}

/// Walks the dyadic quantile tree: at each level the current cell splits at
/// the Gaussian quantile of its midpoint fraction, and `x` goes left when
/// it does not exceed the split. Nesting is exact by construction, and the
/// level-`l` cell carries reference mass `2^{-l}`.
fn quantile_path(x: f64, level: u32, mean: f64, sigma: f64) -> u64 {
    let mut index = 0u64;
    let mut lo = 0.0f64; // probability-space bounds of the current cell
    let mut hi = 1.0f64;
    for _ in 0..level {
        let mid = 0.5 * (lo + hi);
        let split = normal::quantile(mid, mean, sigma);
        index <<= 1;
        if x > split {
            index |= 1;
            lo = mid;
        } else {
            hi = mid;
        }
    }
    index
}

/// Quantizes a whole real sample once to `depth`, returning per-point bit
/// paths. The level-`l` cell of point `i` is `paths[i] >> (depth - l)`.
pub fn quantize_paths(xs: &[f64], depth: u32, scheme: &PartitionScheme) -> Result<Vec<u64>> {
    if depth > 63 {
        return Err(Error::InvalidParameter(
            "quantization depth beyond 63 bits is not representable".into(),
        ));
    }
    xs.iter()
        .map(|&x| quantize(Point::Real(x), depth, scheme).map(|c| c.index))
        .collect()
}

/// A finite reference measure supplying total mass and per-cell masses.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceMeasure {
    /// Counting measure on a finite alphabet: every singleton has mass 1.
    CountingFinite { alphabet_size: u64 },
    /// Geometric point masses on the naturals: `mu(m) = q (1-q)^{m-1}`.
    GeometricNaturals { q: f64 },
    /// Normal probability measure on the real line.
    Gaussian { mean: f64, sigma: f64 },
    /// Uniform probability measure on `(0, 1]`.
    UniformUnit,
}

impl ReferenceMeasure {
    pub fn validate(&self) -> Result<()> {
        match self {
            ReferenceMeasure::CountingFinite { alphabet_size } => {
                if *alphabet_size == 0 {
                    return Err(Error::InvalidParameter("alphabet size must be >= 1".into()));
                }
            }
            ReferenceMeasure::GeometricNaturals { q } => {
                if !(*q > 0.0 && *q < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "geometric parameter must lie in (0,1), got {q}"
                    )));
                }
            }
            ReferenceMeasure::Gaussian { sigma, .. } => {
                if !(*sigma > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "gaussian sigma must be positive, got {sigma}"
                    )));
                }
            }
            ReferenceMeasure::UniformUnit => {}
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            ReferenceMeasure::CountingFinite { alphabet_size } => *alphabet_size as f64,
            _ => 1.0,
        }
    }

    /// Log point mass of a single natural number (countable measures only).
    pub fn ln_point_mass(&self, m: u64) -> Result<f64> {
        match self {
            ReferenceMeasure::GeometricNaturals { q } => {
                if m == 0 {
                    return Err(Error::Domain("naturals start at 1".into()));
                }
                Ok(q.ln() + (m as f64 - 1.0) * (1.0 - q).ln())
            }
            ReferenceMeasure::CountingFinite { .. } => Ok(0.0),
            _ => Err(Error::Unsupported(
                "point masses are defined for countable references only".into(),
            )),
        }
    }

    /// Log density with respect to Lebesgue measure (real references only).
    pub fn ln_density(&self, x: f64) -> Result<f64> {
        match self {
            ReferenceMeasure::Gaussian { mean, sigma } => {
                let z = (x - mean) / sigma;
                Ok(-0.5 * z * z - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln())
            }
            ReferenceMeasure::UniformUnit => {
                if x > 0.0 && x <= 1.0 {
                    Ok(0.0)
                } else {
                    Err(Error::Domain(format!("{x} outside (0, 1]")))
                }
            }
            _ => Err(Error::Unsupported(
                "densities are defined for real-valued references only".into(),
            )),
        }
    }
}

/// Log reference mass of a cell under a compatible scheme/measure pair.
pub fn cell_ln_mass(
    cell: Cell,
    measure: &ReferenceMeasure,
    scheme: &PartitionScheme,
) -> Result<f64> {
    match (scheme, measure) {
        (PartitionScheme::TrivialFinite { alphabet_size }, ReferenceMeasure::CountingFinite { .. }) => {
            if cell.index >= *alphabet_size {
                return Err(Error::Domain("cell index out of range".into()));
            }
            Ok(0.0)
        }
        (PartitionScheme::QuantileDyadic { .. }, ReferenceMeasure::Gaussian { .. })
        | (PartitionScheme::DyadicUnit, ReferenceMeasure::UniformUnit) => {
            // Dyadic construction in probability space: mass 2^{-l} exactly.
            Ok(-(cell.level as f64) * std::f64::consts::LN_2)
        }
        (PartitionScheme::IncrementalNaturals, ReferenceMeasure::GeometricNaturals { q }) => {
            let l = cell.level as u64;
            if cell.index < l {
                // Singleton {index + 1}.
                measure.ln_point_mass(cell.index + 1)
            } else if cell.index == l {
                // Tail cell {l+1, l+2, ..} with geometric tail mass (1-q)^l.
                Ok(l as f64 * (1.0 - q).ln())
            } else {
                Err(Error::Domain("cell index out of range".into()))
            }
        }
        _ => Err(Error::Config(
            "partition scheme and reference measure are incompatible".into(),
        )),
    }
}

/// Result of the separating-level search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparatingLevel {
    /// Least level at which all sample points fall into distinct cells.
    Level(u32),
    /// No level up to the cap separates the sample (ties in the data).
    Saturated,
}

/// Smallest level making all quantized points distinct, searched up to
/// `level_cap`. Distinctness is monotone in the level because the
/// partitions nest, so a binary search applies.
pub fn min_separating_level(
    xs: &[f64],
    scheme: &PartitionScheme,
    level_cap: u32,
) -> Result<SeparatingLevel> {
    match scheme {
        PartitionScheme::DyadicUnit | PartitionScheme::QuantileDyadic { .. } => {}
        _ => {
            return Err(Error::Config(
                "separating level applies to dyadic and quantile schemes".into(),
            ))
        }
    }
    if xs.len() <= 1 {
        return Ok(SeparatingLevel::Level(0));
    }
    let depth = level_cap.min(63);
    let paths = quantize_paths(xs, depth, scheme)?;
    if !all_distinct(paths.iter().copied()) {
        return Ok(SeparatingLevel::Saturated);
    }
    let (mut lo, mut hi) = (0u32, depth); // separation holds at hi
    while lo < hi {
        let mid = (lo + hi) / 2;
        if all_distinct(paths.iter().map(|&p| p >> (depth - mid))) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(SeparatingLevel::Level(lo))
}

fn all_distinct(vals: impl Iterator<Item = u64>) -> bool {
    let mut v: Vec<u64> = vals.collect();
    v.sort_unstable();
    v.windows(2).all(|w| w[0] != w[1])
}

/// Separating level of a prefix of precomputed paths (same convention as
/// [`quantize_paths`]).
pub fn separating_level_of_paths(paths: &[u64], depth: u32) -> SeparatingLevel {
    if paths.len() <= 1 {
        return SeparatingLevel::Level(0);
    }
    if !all_distinct(paths.iter().copied()) {
        return SeparatingLevel::Saturated;
    }
    let (mut lo, mut hi) = (0u32, depth);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if all_distinct(paths.iter().map(|&p| p >> (depth - mid))) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    SeparatingLevel::Level(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppm::repetition_length;
    use proptest::prelude::*;

    #[test]
    fn dyadic_examples() {
        // x = 0.3 at level 1 lands in (0, 1/2].
        let c = quantize(Point::Real(0.3), 1, &PartitionScheme::DyadicUnit).unwrap();
        assert_eq!(c, Cell { level: 1, index: 0 });
        // Level 0 is the single whole-space cell.
        let c = quantize(Point::Real(0.77), 0, &PartitionScheme::DyadicUnit).unwrap();
        assert_eq!(c.index, 0);
        // Right-closed bins: 0.5 belongs to the lower bin at level 1.
        let c = quantize(Point::Real(0.5), 1, &PartitionScheme::DyadicUnit).unwrap();
        assert_eq!(c.index, 0);
        assert!(quantize(Point::Real(0.0), 1, &PartitionScheme::DyadicUnit).is_err());
        assert!(quantize(Point::Real(1.2), 1, &PartitionScheme::DyadicUnit).is_err());
    }

    #[test]
    fn incremental_examples() {
        let s = PartitionScheme::IncrementalNaturals;
        // x = 7 at level 3 falls into the tail cell {4, 5, ...}.
        let c = quantize(Point::Symbol(7), 3, &s).unwrap();
        assert_eq!(c.index, 3);
        let c = quantize(Point::Symbol(2), 3, &s).unwrap();
        assert_eq!(c.index, 1);
        // Level 0 lumps everything into one cell.
        let c = quantize(Point::Symbol(5), 0, &s).unwrap();
        assert_eq!(c.index, 0);
        assert!(quantize(Point::Symbol(0), 2, &s).is_err());
        assert_eq!(s.alphabet_size(3), 4);
    }

    #[test]
    fn cell_masses() {
        let g = ReferenceMeasure::Gaussian { mean: 0.0, sigma: 1.0 };
        let s = PartitionScheme::QuantileDyadic { mean: 0.0, sigma: 1.0 };
        for idx in [0u64, 3, 7] {
            let m = cell_ln_mass(Cell { level: 3, index: idx }, &g, &s).unwrap();
            assert!((m - 0.125f64.ln()).abs() < 1e-15);
        }
        let m = cell_ln_mass(Cell { level: 0, index: 0 }, &g, &s).unwrap();
        assert_eq!(m, 0.0);
        // Geometric: singleton and tail cells.
        let geo = ReferenceMeasure::GeometricNaturals { q: 0.5 };
        let inc = PartitionScheme::IncrementalNaturals;
        let m = cell_ln_mass(Cell { level: 2, index: 0 }, &geo, &inc).unwrap();
        assert!((m - 0.5f64.ln()).abs() < 1e-15);
        let m = cell_ln_mass(Cell { level: 2, index: 2 }, &geo, &inc).unwrap();
        assert!((m - 0.25f64.ln()).abs() < 1e-12);
        // Incompatible pairing is rejected.
        assert!(cell_ln_mass(Cell { level: 1, index: 0 }, &geo, &s).is_err());
    }

    #[test]
    fn geometric_cell_additivity() {
        // mu(level-l cell) = sum of its level-(l+1) children, all levels <= 12.
        let geo = ReferenceMeasure::GeometricNaturals { q: 0.3 };
        let inc = PartitionScheme::IncrementalNaturals;
        for l in 0..=12u32 {
            for index in 0..=l as u64 {
                let parent = cell_ln_mass(Cell { level: l, index }, &geo, &inc)
                    .unwrap()
                    .exp();
                // Children at level l+1: singletons stay singletons; the
                // tail cell splits into {l+1} and the deeper tail.
                let children: f64 = if index < l as u64 {
                    cell_ln_mass(Cell { level: l + 1, index }, &geo, &inc)
                        .unwrap()
                        .exp()
                } else {
                    cell_ln_mass(Cell { level: l + 1, index: l as u64 }, &geo, &inc)
                        .unwrap()
                        .exp()
                        + cell_ln_mass(
                            Cell { level: l + 1, index: l as u64 + 1 },
                            &geo,
                            &inc,
                        )
                        .unwrap()
                        .exp()
                };
                assert!((parent - children).abs() < 1e-12, "l={l} index={index}");
            }
        }
    }

    #[test]
    fn separating_level_examples() {
        let s = PartitionScheme::DyadicUnit;
        assert_eq!(
            min_separating_level(&[0.4], &s, 40).unwrap(),
            SeparatingLevel::Level(0)
        );
        // 0.3 and 0.6 share the level-0 cell, split at level 1.
        assert_eq!(
            min_separating_level(&[0.3, 0.6], &s, 40).unwrap(),
            SeparatingLevel::Level(1)
        );
        assert_eq!(
            min_separating_level(&[0.3, 0.3], &s, 40).unwrap(),
            SeparatingLevel::Saturated
        );
    }

    #[test]
    fn separating_level_is_least_repetition_free_level() {
        let s = PartitionScheme::QuantileDyadic { mean: 0.0, sigma: 1.0 };
        let xs = [0.12, -0.7, 0.13, 1.4, -0.69, 2.2, 0.115];
        let cap = 40;
        let m = match min_separating_level(&xs, &s, cap).unwrap() {
            SeparatingLevel::Level(l) => l,
            SeparatingLevel::Saturated => panic!("unexpected saturation"),
        };
        let quantized = |l: u32| -> Vec<u64> {
            xs.iter()
                .map(|&x| quantize(Point::Real(x), l, &s).unwrap().index)
                .collect()
        };
        assert_eq!(repetition_length(&quantized(m)), 0);
        if m > 0 {
            assert!(repetition_length(&quantized(m - 1)) > 0);
        }
    }

    proptest! {
        #[test]
        fn nesting(x in -4.0f64..4.0) {
            let s = PartitionScheme::QuantileDyadic { mean: 0.5, sigma: 2.0 };
            for l in 0..16u32 {
                let parent = quantize(Point::Real(x), l, &s).unwrap().index;
                let child = quantize(Point::Real(x), l + 1, &s).unwrap().index;
                prop_assert_eq!(child >> 1, parent);
            }
        }

        #[test]
        fn dyadic_nesting(x in proptest::num::f64::POSITIVE.prop_map(|v| (v % 1.0).max(1e-12))) {
            let s = PartitionScheme::DyadicUnit;
            for l in 0..16u32 {
                let parent = quantize(Point::Real(x), l, &s).unwrap().index;
                let child = quantize(Point::Real(x), l + 1, &s).unwrap().index;
                prop_assert_eq!(child >> 1, parent);
            }
        }
    }
}
