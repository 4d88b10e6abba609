//! Experiment orchestration: specs, replicates, record output, and
//! sequence file IO. Everything the `entrod` binary does goes through
//! here, so results are reproducible from a spec and a seed alone.
//!
//! Records use a fixed schema, one metric value per (replicate, grid
//! point): CSV with header `spec_hash,replicate,n,metric,value,flag`, or
//! JSONL mirroring the same fields. The spec hash covers every semantic
//! field, so any record can be re-derived by re-running its spec.
//! Aggregate rows (means and standard errors across replicates) carry the
//! replicate count in the replicate column and the flag `aggregate`.

use crate::core::{standard_grid, Sequence};
use crate::error::{Error, Result};
use crate::npd::{self, EstimateTrajectory, NpdConfig};
use crate::prediction::{
    total_variation, BaseMeasure, CesaroPredictor, PredictorConfig,
};
use crate::quantization::{PartitionScheme, ReferenceMeasure};
use crate::sources::{self, SourceModel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::{BufRead, Read, Write};
use std::path::{Path, PathBuf};

/// Magic header of the binary little-endian f64 sequence format.
pub const BINARY_MAGIC: &[u8; 16] = b"ENTROD-F64-SEQ\0\0";

/// Where the sample comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    Synthetic(SourceModel),
    Input(PathBuf),
}

/// Partition scheme selector; the alphabet size of the finite scheme is
/// resolved from the source or data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKey {
    Finite,
    Dyadic,
    Quantile,
    Incremental,
}

/// Reference measure selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RefKey {
    Counting,
    Geometric(f64),
    Gaussian(f64, f64),
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Nats,
    Bits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Estimate,
    Predict,
}

/// Cesàro window policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowSpec {
    /// Exact up to 4096 symbols, cap 512 beyond.
    Auto,
    Exact,
    Cap(usize),
}

/// One sweep axis: a spec key and the values to cross.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Single(TaskKind),
    Sweep { of: TaskKind, axes: Vec<SweepAxis> },
}

/// A full experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub task: Task,
    pub source: SourceSpec,
    pub scheme: SchemeKey,
    pub reference: RefKey,
    pub n_max: usize,
    pub replicates: usize,
    pub seed: u64,
    pub window: WindowSpec,
    pub margin: u32,
    pub level_cap: u32,
    pub units: Units,
    pub format: OutputFormat,
    /// Use sample moments as the Gaussian reference (experimental mode).
    pub plugin_moments: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(Error::Config("replicate count must be >= 1".into()));
        }
        if self.n_max < 16 {
            return Err(Error::Config("n_max must be at least 16".into()));
        }
        if let Task::Sweep { axes, .. } = &self.task {
            if axes.is_empty() || axes.iter().any(|a| a.values.is_empty()) {
                return Err(Error::Config("sweep grid must be nonempty".into()));
            }
        }
        if let SourceSpec::Input(_) = &self.source {
            if self.replicates != 1 {
                return Err(Error::Config(
                    "fixed input data admits exactly one replicate".into(),
                ));
            }
        }
        if let SourceSpec::Synthetic(m) = &self.source {
            m.validate()?;
        }
        Ok(())
    }

    /// Stable textual form of every semantic field; hashed into the
    /// record key.
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        let task = match &self.task {
            Task::Single(TaskKind::Estimate) => "estimate".to_string(),
            Task::Single(TaskKind::Predict) => "predict".to_string(),
            Task::Sweep { of, axes } => {
                let of = match of {
                    TaskKind::Estimate => "estimate",
                    TaskKind::Predict => "predict",
                };
                let axes: Vec<String> = axes
                    .iter()
                    .map(|a| format!("{}={}", a.key, a.values.join("|")))
                    .collect();
                format!("sweep[{of};{}]", axes.join(";"))
            }
        };
        let source = match &self.source {
            SourceSpec::Synthetic(m) => format!("{m:?}"),
            SourceSpec::Input(p) => format!("input:{}", p.display()),
        };
        use std::fmt::Write as _;
        let _ = writeln!(s, "task={task}");
        let _ = writeln!(s, "source={source}");
        let _ = writeln!(s, "scheme={:?}", self.scheme);
        let _ = writeln!(s, "ref={:?}", self.reference);
        let _ = writeln!(s, "n_max={}", self.n_max);
        let _ = writeln!(s, "replicates={}", self.replicates);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "window={:?}", self.window);
        let _ = writeln!(s, "margin={}", self.margin);
        let _ = writeln!(s, "level_cap={}", self.level_cap);
        let _ = writeln!(s, "units={:?}", self.units);
        let _ = writeln!(s, "plugin={}", self.plugin_moments);
        s
    }

    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical_string().as_bytes());
        let digest = h.finalize();
        digest[..6].iter().map(|b| format!("{b:02x}")).collect()
    }

    fn window_cap_for(&self, n: usize) -> Option<usize> {
        match self.window {
            WindowSpec::Auto => {
                if n <= 4096 {
                    None
                } else {
                    Some(512)
                }
            }
            WindowSpec::Exact => None,
            WindowSpec::Cap(w) => Some(w),
        }
    }
}

/// One output record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub spec_hash: String,
    pub replicate: u32,
    pub n: usize,
    pub metric: String,
    pub value: f64,
    pub flag: String,
}

/// Metrics measured in nats, subject to unit conversion.
fn is_entropy_metric(metric: &str) -> bool {
    matches!(
        metric,
        "entropy_rate" | "entropy_rate_qr" | "correction_c_n" | "oracle_entropy_rate"
    )
}

fn convert_units(records: &mut [RunRecord], units: Units) {
    if units == Units::Bits {
        for r in records.iter_mut() {
            if is_entropy_metric(&r.metric) {
                r.value /= std::f64::consts::LN_2;
            }
        }
    }
}

/// Builds the density configuration implied by the spec keys, resolving
/// the finite-alphabet size from the data.
fn resolve_npd_config(spec: &ExperimentSpec, data: &Sequence) -> Result<NpdConfig> {
    let (scheme, reference) = match (spec.scheme, spec.reference) {
        (SchemeKey::Finite, RefKey::Counting) => {
            let xs = data.as_symbolic().ok_or_else(|| {
                Error::Config("finite scheme needs a symbolic source".into())
            })?;
            let d = xs.iter().copied().max().unwrap_or(0) + 1;
            let d = match &spec.source {
                SourceSpec::Synthetic(SourceModel::IidCategorical {
                    probs,
                    first_symbol: 0,
                }) => probs.len() as u64,
                SourceSpec::Synthetic(SourceModel::MarkovChain { transition }) => {
                    transition.len() as u64
                }
                SourceSpec::Synthetic(_) => {
                    return Err(Error::Config(
                        "finite scheme needs a finite-alphabet source starting at 0".into(),
                    ))
                }
                SourceSpec::Input(_) => d,
            };
            (
                PartitionScheme::TrivialFinite { alphabet_size: d },
                ReferenceMeasure::CountingFinite { alphabet_size: d },
            )
        }
        (SchemeKey::Incremental, RefKey::Geometric(q)) => (
            PartitionScheme::IncrementalNaturals,
            ReferenceMeasure::GeometricNaturals { q },
        ),
        (SchemeKey::Quantile, RefKey::Gaussian(mean, sigma)) => (
            PartitionScheme::QuantileDyadic { mean, sigma },
            ReferenceMeasure::Gaussian { mean, sigma },
        ),
        (SchemeKey::Dyadic, RefKey::Uniform) => {
            (PartitionScheme::DyadicUnit, ReferenceMeasure::UniformUnit)
        }
        (s, r) => {
            return Err(Error::Config(format!(
                "scheme {s:?} cannot be paired with reference {r:?}"
            )))
        }
    };
    NpdConfig::new(scheme, reference)?
        .with_level_cap(spec.level_cap)?
        .with_margin(spec.margin)
}

fn load_data(spec: &ExperimentSpec, replicate: u32) -> Result<Sequence> {
    match &spec.source {
        SourceSpec::Synthetic(model) => {
            sources::generate(model, spec.seed, replicate as u64, spec.n_max)
        }
        SourceSpec::Input(path) => {
            let seq = read_sequence_file(path)?;
            if seq.len() < spec.n_max {
                return Err(Error::Config(format!(
                    "input has {} observations, n_max is {}",
                    seq.len(),
                    spec.n_max
                )));
            }
            Ok(match seq {
                Sequence::Symbolic(v) => Sequence::Symbolic(v[..spec.n_max].to_vec()),
                Sequence::Real(v) => Sequence::Real(v[..spec.n_max].to_vec()),
            })
        }
    }
}

fn push_trajectory(
    records: &mut Vec<RunRecord>,
    hash: &str,
    replicate: u32,
    metric: &str,
    traj: &EstimateTrajectory,
) {
    for p in &traj.points {
        records.push(RunRecord {
            spec_hash: hash.into(),
            replicate,
            n: p.n,
            metric: metric.into(),
            value: p.estimate_nats,
            flag: p.flags.label(),
        });
    }
}

/// Runs the estimate task: one record per (replicate, grid point, metric).
pub fn run_estimate(spec: &ExperimentSpec) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let hash = spec.hash();
    let grid = standard_grid(spec.n_max);
    let oracle = match &spec.source {
        SourceSpec::Synthetic(m) => sources::entropy_oracle(m).ok(),
        SourceSpec::Input(_) => None,
    };
    let per_replicate: Vec<Result<Vec<RunRecord>>> = (0..spec.replicates as u32)
        .into_par_iter()
        .map(|rep| estimate_one(spec, &hash, rep, &grid, oracle))
        .collect();
    let mut records = Vec::new();
    for r in per_replicate {
        records.extend(r?);
    }
    convert_units(&mut records, spec.units);
    canonicalize(&mut records);
    Ok(records)
}

fn estimate_one(
    spec: &ExperimentSpec,
    hash: &str,
    replicate: u32,
    grid: &[usize],
    oracle: Option<f64>,
) -> Result<Vec<RunRecord>> {
    let data = load_data(spec, replicate)?;
    let cfg = resolve_npd_config(spec, &data)?;
    let mut records = Vec::new();
    match (&cfg.scheme, &data) {
        (PartitionScheme::TrivialFinite { .. }, Sequence::Symbolic(_)) => {
            let traj = npd::entropy_rate_estimate(&data, &cfg, grid)?;
            push_trajectory(&mut records, hash, replicate, "entropy_rate", &traj);
        }
        (PartitionScheme::IncrementalNaturals, Sequence::Symbolic(xs)) => {
            let traj = npd::corrected_countable_estimate(xs, &cfg, grid)?;
            push_trajectory(&mut records, hash, replicate, "entropy_rate", &traj);
            let qr = npd::ppm_qr_estimate(xs, &cfg, grid)?;
            push_trajectory(&mut records, hash, replicate, "entropy_rate_qr", &qr);
            for p in &qr.points {
                records.push(RunRecord {
                    spec_hash: hash.into(),
                    replicate,
                    n: p.n,
                    metric: "correction_c_n".into(),
                    value: p.correction_nats,
                    flag: String::new(),
                });
                records.push(RunRecord {
                    spec_hash: hash.into(),
                    replicate,
                    n: p.n,
                    metric: "q_n".into(),
                    value: p.q_n.unwrap_or(0) as f64,
                    flag: String::new(),
                });
                records.push(RunRecord {
                    spec_hash: hash.into(),
                    replicate,
                    n: p.n,
                    metric: "r_n".into(),
                    value: p.r_n.unwrap_or(0) as f64,
                    flag: String::new(),
                });
            }
        }
        (PartitionScheme::QuantileDyadic { .. }, Sequence::Real(xs)) => {
            let traj = if spec.plugin_moments {
                npd::plugin_gaussian_estimate(xs, &cfg, grid)?
            } else {
                npd::gaussian_corrected_estimate(xs, &cfg, grid)?
            };
            push_trajectory(&mut records, hash, replicate, "entropy_rate", &traj);
            for p in &traj.points {
                if let Some(sep) = p.separating_level {
                    records.push(RunRecord {
                        spec_hash: hash.into(),
                        replicate,
                        n: p.n,
                        metric: "separating_level".into(),
                        value: match sep {
                            crate::quantization::SeparatingLevel::Level(l) => l as f64,
                            crate::quantization::SeparatingLevel::Saturated => -1.0,
                        },
                        flag: p.flags.label(),
                    });
                }
            }
        }
        (PartitionScheme::DyadicUnit, Sequence::Real(_)) => {
            let traj = npd::entropy_rate_estimate(&data, &cfg, grid)?;
            push_trajectory(&mut records, hash, replicate, "entropy_rate", &traj);
        }
        _ => {
            return Err(Error::Config(
                "source kind does not match the estimator".into(),
            ))
        }
    }
    if let Some(h) = oracle {
        for &n in grid {
            records.push(RunRecord {
                spec_hash: hash.into(),
                replicate,
                n,
                metric: "oracle_entropy_rate".into(),
                value: h,
                flag: String::new(),
            });
        }
    }
    Ok(records)
}

/// Runs the predict task: mistake rates, the unpredictability oracle, and
/// total variation to the true conditional law where it is known.
pub fn run_predict(spec: &ExperimentSpec) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let hash = spec.hash();
    let grid = standard_grid(spec.n_max);
    let per_replicate: Vec<Result<Vec<RunRecord>>> = (0..spec.replicates as u32)
        .into_par_iter()
        .map(|rep| predict_one(spec, &hash, rep, &grid))
        .collect();
    let mut records = Vec::new();
    for r in per_replicate {
        records.extend(r?);
    }
    // Aggregates across replicates, keyed by the replicate count.
    if spec.replicates > 1 {
        for &n in &grid {
            let vals: Vec<f64> = records
                .iter()
                .filter(|r| r.metric == "mistake_rate" && r.n == n)
                .map(|r| r.value)
                .collect();
            let k = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / k;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
            let sem = (var / k).sqrt();
            for (metric, value) in [("mistake_rate_mean", mean), ("mistake_rate_sem", sem)] {
                records.push(RunRecord {
                    spec_hash: hash.clone(),
                    replicate: spec.replicates as u32,
                    n,
                    metric: metric.into(),
                    value,
                    flag: "aggregate".into(),
                });
            }
        }
    }
    convert_units(&mut records, spec.units);
    canonicalize(&mut records);
    Ok(records)
}

fn predict_one(
    spec: &ExperimentSpec,
    hash: &str,
    replicate: u32,
    grid: &[usize],
) -> Result<Vec<RunRecord>> {
    let data = load_data(spec, replicate)?;
    let xs = data
        .as_symbolic()
        .ok_or_else(|| Error::Config("prediction needs a symbolic source".into()))?;
    let cfg = resolve_npd_config(spec, &data)?;
    let base = match &cfg.scheme {
        PartitionScheme::TrivialFinite { alphabet_size } => BaseMeasure::PpmTotal {
            alphabet_size: *alphabet_size,
        },
        PartitionScheme::IncrementalNaturals => BaseMeasure::NpdTotal { config: cfg.clone() },
        _ => {
            return Err(Error::Config(
                "prediction needs a finite or incremental scheme".into(),
            ))
        }
    };
    let pcfg = PredictorConfig::new(base, spec.window_cap_for(spec.n_max))?;
    let model = match &spec.source {
        SourceSpec::Synthetic(m) => Some(m.clone()),
        SourceSpec::Input(_) => None,
    };
    let oracle_u = model
        .as_ref()
        .and_then(|m| sources::unpredictability_oracle(m).ok());
    let mut predictor = CesaroPredictor::new(&pcfg)?;
    let mut records = Vec::new();
    let mut mistakes = 0usize;
    let mut next_grid = 0usize;
    for (idx, &sym) in xs.iter().enumerate() {
        let guess = predictor.predict()?;
        if guess != sym {
            mistakes += 1;
        }
        predictor.consume(sym)?;
        let n = idx + 1;
        if next_grid < grid.len() && grid[next_grid] == n {
            next_grid += 1;
            records.push(RunRecord {
                spec_hash: hash.into(),
                replicate,
                n,
                metric: "mistake_rate".into(),
                value: mistakes as f64 / n as f64,
                flag: String::new(),
            });
            if let Some(u) = oracle_u {
                records.push(RunRecord {
                    spec_hash: hash.into(),
                    replicate,
                    n,
                    metric: "oracle_unpredictability".into(),
                    value: u,
                    flag: String::new(),
                });
            }
            if let Some(m) = &model {
                if let Some(truth) = sources::conditional_law(m, &xs[..n]) {
                    let est = predictor.distribution()?;
                    records.push(RunRecord {
                        spec_hash: hash.into(),
                        replicate,
                        n,
                        metric: "tv_to_truth".into(),
                        value: total_variation(&truth, &est),
                        flag: String::new(),
                    });
                }
            }
        }
    }
    Ok(records)
}

/// Runs a sweep: the cross product of the axis values, each cell a full
/// estimate or predict run. Cell records carry the cell assignment in the
/// flag column and the cell's own spec hash.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let (of, axes) = match &spec.task {
        Task::Sweep { of, axes } => (*of, axes.clone()),
        Task::Single(_) => {
            return Err(Error::Config("run_sweep needs a sweep task".into()))
        }
    };
    let mut cells: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for axis in &axes {
        let mut next = Vec::new();
        for cell in &cells {
            for v in &axis.values {
                let mut c = cell.clone();
                c.push((axis.key.clone(), v.clone()));
                next.push(c);
            }
        }
        cells = next;
    }
    let mut records = Vec::new();
    for cell in cells {
        let mut sub = spec.clone();
        sub.task = Task::Single(of);
        for (k, v) in &cell {
            apply_override(&mut sub, k, v)?;
        }
        let cell_tag: Vec<String> = cell.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let cell_tag = cell_tag.join(",");
        let mut cell_records = match of {
            TaskKind::Estimate => run_estimate(&sub)?,
            TaskKind::Predict => run_predict(&sub)?,
        };
        for r in cell_records.iter_mut() {
            r.flag = if r.flag.is_empty() {
                cell_tag.clone()
            } else {
                format!("{cell_tag}+{}", r.flag)
            };
        }
        records.extend(cell_records);
    }
    Ok(records)
}

fn apply_override(spec: &mut ExperimentSpec, key: &str, value: &str) -> Result<()> {
    match key {
        "margin" => {
            spec.margin = value
                .parse()
                .map_err(|_| Error::Parse(format!("bad margin {value}")))?
        }
        "level-cap" | "level_cap" => {
            spec.level_cap = value
                .parse()
                .map_err(|_| Error::Parse(format!("bad level cap {value}")))?
        }
        "window" => spec.window = parse_window(value)?,
        "n-max" | "n_max" => {
            spec.n_max = value
                .parse()
                .map_err(|_| Error::Parse(format!("bad n_max {value}")))?
        }
        "seed" => {
            spec.seed = value
                .parse()
                .map_err(|_| Error::Parse(format!("bad seed {value}")))?
        }
        _ => {
            return Err(Error::Config(format!(
                "unknown sweep axis '{key}' (margin, level-cap, window, n-max, seed)"
            )))
        }
    }
    Ok(())
}

/// Sorts records canonically: replicate, then n, then metric name.
fn canonicalize(records: &mut [RunRecord]) {
    records.sort_by(|a, b| {
        (a.replicate, a.n, &a.metric, &a.flag).cmp(&(b.replicate, b.n, &b.metric, &b.flag))
    });
}

/// Writes records in the chosen format.
pub fn write_records(out: &mut dyn Write, records: &[RunRecord], format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            writeln!(out, "spec_hash,replicate,n,metric,value,flag")?;
            for r in records {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.spec_hash, r.replicate, r.n, r.metric, r.value, r.flag
                )?;
            }
        }
        OutputFormat::Jsonl => {
            for r in records {
                let line = serde_json::to_string(r)
                    .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
                writeln!(out, "{line}")?;
            }
        }
    }
    Ok(())
}

/// Reads a sequence file: the 16-byte magic selects the binary f64
/// format; otherwise one value per line, nonnegative integers for
/// symbolic data or decimals for real data.
pub fn read_sequence_file(path: &Path) -> Result<Sequence> {
    let mut file = std::fs::File::open(path)?;
    let mut head = [0u8; 16];
    let got = file.read(&mut head)?;
    if got == 16 && &head == BINARY_MAGIC {
        let mut rest = Vec::new();
        file.read_to_end(&mut rest)?;
        if rest.len() % 8 != 0 {
            return Err(Error::Parse(
                "binary payload is not a whole number of f64 values".into(),
            ));
        }
        let vals = rest
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        return Ok(Sequence::Real(vals));
    }
    // Text mode.
    let reader = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut ints: Vec<u64> = Vec::new();
    let mut reals: Vec<f64> = Vec::new();
    let mut symbolic = true;
    for line in reader.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if symbolic {
            match t.parse::<u64>() {
                Ok(v) => {
                    ints.push(v);
                    continue;
                }
                Err(_) => {
                    // Fall back to real-valued parsing for the whole file.
                    symbolic = false;
                    reals = ints.iter().map(|&v| v as f64).collect();
                }
            }
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::Parse(format!("unparseable value '{t}'")))?;
        reals.push(v);
    }
    if symbolic {
        Ok(Sequence::Symbolic(ints))
    } else {
        Ok(Sequence::Real(reals))
    }
}

/// Writes the binary f64 sequence format.
pub fn write_sequence_binary(path: &Path, values: &[f64]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(BINARY_MAGIC)?;
    for v in values {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Parses a source description: `iid(p0,p1,..)` over `{0,1,..}`,
/// `iid1(p1,p2,..)` over `{1,2,..}`, `markov(path)` with a row-per-state
/// transition file, `geom(q)`, `gauss(m,sigma)`, `ar1(phi,sigma)`.
pub fn parse_source(s: &str) -> Result<SourceSpec> {
    let (name, args) = split_call(s)?;
    let spec = match name {
        "iid" | "iid1" => {
            let probs = parse_floats(&args)?;
            SourceSpec::Synthetic(SourceModel::IidCategorical {
                probs,
                first_symbol: if name == "iid1" { 1 } else { 0 },
            })
        }
        "markov" => {
            let path = Path::new(args.trim());
            let transition = read_transition_file(path)?;
            SourceSpec::Synthetic(SourceModel::MarkovChain { transition })
        }
        "geom" => {
            let v = parse_floats(&args)?;
            if v.len() != 1 {
                return Err(Error::Parse("geom takes one parameter".into()));
            }
            SourceSpec::Synthetic(SourceModel::IidGeometric { q: v[0] })
        }
        "gauss" => {
            let v = parse_floats(&args)?;
            if v.len() != 2 {
                return Err(Error::Parse("gauss takes mean,sigma".into()));
            }
            SourceSpec::Synthetic(SourceModel::IidGaussian {
                mean: v[0],
                sigma: v[1],
            })
        }
        "ar1" => {
            let v = parse_floats(&args)?;
            if v.len() != 2 {
                return Err(Error::Parse("ar1 takes phi,sigma".into()));
            }
            SourceSpec::Synthetic(SourceModel::GaussianAr1 {
                phi: v[0],
                innovation_sigma: v[1],
            })
        }
        _ => {
            return Err(Error::Parse(format!(
                "unknown source '{name}' (iid, iid1, markov, geom, gauss, ar1)"
            )))
        }
    };
    if let SourceSpec::Synthetic(m) = &spec {
        m.validate()?;
    }
    Ok(spec)
}

/// Reads a plain-text transition matrix, one whitespace-separated row per
/// state.
pub fn read_transition_file(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            t.split_whitespace().map(str::parse::<f64>).collect();
        rows.push(row.map_err(|_| Error::Parse(format!("bad transition row '{t}'")))?);
    }
    Ok(rows)
}

pub fn parse_scheme(s: &str) -> Result<SchemeKey> {
    match s.trim() {
        "finite" => Ok(SchemeKey::Finite),
        "dyadic" => Ok(SchemeKey::Dyadic),
        "quantile" => Ok(SchemeKey::Quantile),
        "incremental" => Ok(SchemeKey::Incremental),
        other => Err(Error::Parse(format!(
            "unknown scheme '{other}' (finite, dyadic, quantile, incremental)"
        ))),
    }
}

pub fn parse_reference(s: &str) -> Result<RefKey> {
    let s = s.trim();
    if s == "counting" {
        return Ok(RefKey::Counting);
    }
    if s == "uniform" {
        return Ok(RefKey::Uniform);
    }
    let (name, args) = split_call(s)?;
    match name {
        "geometric" | "geom" => {
            let v = parse_floats(&args)?;
            if v.len() != 1 {
                return Err(Error::Parse("geometric reference takes one parameter".into()));
            }
            Ok(RefKey::Geometric(v[0]))
        }
        "gaussian" | "gauss" => {
            let v = parse_floats(&args)?;
            if v.len() != 2 {
                return Err(Error::Parse("gaussian reference takes mean,sigma".into()));
            }
            Ok(RefKey::Gaussian(v[0], v[1]))
        }
        _ => Err(Error::Parse(format!(
            "unknown reference '{name}' (counting, geometric(q), gaussian(m,s), uniform)"
        ))),
    }
}

pub fn parse_window(s: &str) -> Result<WindowSpec> {
    match s.trim() {
        "auto" => Ok(WindowSpec::Auto),
        "exact" => Ok(WindowSpec::Exact),
        other => other
            .parse::<usize>()
            .map(WindowSpec::Cap)
            .map_err(|_| Error::Parse(format!("bad window '{other}' (auto, exact, or a cap)"))),
    }
}

/// Parses `margin=0,2,4,8;window=256,512` into sweep axes.
pub fn parse_sweep_axes(s: &str) -> Result<Vec<SweepAxis>> {
    let mut axes = Vec::new();
    for part in s.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, vals) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad sweep axis '{part}'")))?;
        let values: Vec<String> = vals
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(Error::Config(format!("sweep axis '{key}' has no values")));
        }
        axes.push(SweepAxis {
            key: key.trim().to_string(),
            values,
        });
    }
    if axes.is_empty() {
        return Err(Error::Config("sweep grid must be nonempty".into()));
    }
    Ok(axes)
}

/// Reads a flat `key = value` configuration file (# comments).
pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)?;
    let mut kv = Vec::new();
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad config line '{t}'")))?;
        kv.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(kv)
}

fn split_call(s: &str) -> Result<(&str, String)> {
    let s = s.trim();
    match s.find('(') {
        Some(open) => {
            if !s.ends_with(')') {
                return Err(Error::Parse(format!("unbalanced parentheses in '{s}'")));
            }
            Ok((&s[..open], s[open + 1..s.len() - 1].to_string()))
        }
        None => Ok((s, String::new())),
    }
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number '{p}'")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_spec() -> ExperimentSpec {
        ExperimentSpec {
            task: Task::Single(TaskKind::Estimate),
            source: SourceSpec::Synthetic(SourceModel::IidCategorical {
                probs: vec![0.5, 0.5],
                first_symbol: 0,
            }),
            scheme: SchemeKey::Finite,
            reference: RefKey::Counting,
            n_max: 1024,
            replicates: 1,
            seed: 1,
            window: WindowSpec::Auto,
            margin: 4,
            level_cap: 40,
            units: Units::Nats,
            format: OutputFormat::Csv,
            plugin_moments: false,
        }
    }

    #[test]
    fn estimate_emits_grid_records() {
        let spec = base_spec();
        let records = run_estimate(&spec).unwrap();
        let ests: Vec<_> = records
            .iter()
            .filter(|r| r.metric == "entropy_rate")
            .collect();
        // Grid 16..1024 gives seven report points.
        assert_eq!(ests.len(), 7);
        assert!(records.iter().all(|r| r.spec_hash == spec.hash()));
    }

    #[test]
    fn identical_specs_give_identical_bytes() {
        let spec = base_spec();
        let mut a = Vec::new();
        write_records(&mut a, &run_estimate(&spec).unwrap(), OutputFormat::Csv).unwrap();
        let mut b = Vec::new();
        write_records(&mut b, &run_estimate(&spec).unwrap(), OutputFormat::Csv).unwrap();
        assert_eq!(a, b);
        let mut j = Vec::new();
        write_records(&mut j, &run_estimate(&spec).unwrap(), OutputFormat::Jsonl).unwrap();
        let mut j2 = Vec::new();
        write_records(&mut j2, &run_estimate(&spec).unwrap(), OutputFormat::Jsonl).unwrap();
        assert_eq!(j, j2);
    }

    #[test]
    fn record_rederivation() {
        // Every emitted estimate can be reproduced by calling the library
        // operation with the same inputs.
        let spec = base_spec();
        let records = run_estimate(&spec).unwrap();
        let data = load_data(&spec, 0).unwrap();
        let cfg = resolve_npd_config(&spec, &data).unwrap();
        for r in records.iter().filter(|r| r.metric == "entropy_rate") {
            let traj =
                npd::entropy_rate_estimate(&data, &cfg, &[r.n]).unwrap();
            assert_eq!(traj.points[0].estimate_nats, r.value);
        }
    }

    #[test]
    fn incompatible_pairing_is_config_error() {
        let mut spec = base_spec();
        spec.source = SourceSpec::Synthetic(SourceModel::IidGaussian {
            mean: 0.0,
            sigma: 1.0,
        });
        spec.scheme = SchemeKey::Incremental;
        spec.reference = RefKey::Geometric(0.5);
        let err = run_estimate(&spec).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn units_convert_entropy_metrics_only() {
        let mut spec = base_spec();
        spec.units = Units::Bits;
        spec.n_max = 256;
        let bits = run_estimate(&spec).unwrap();
        spec.units = Units::Nats;
        let nats = run_estimate(&spec).unwrap();
        for (b, n) in bits.iter().zip(&nats) {
            assert_eq!(b.metric, n.metric);
            if is_entropy_metric(&b.metric) {
                assert!((b.value - n.value / std::f64::consts::LN_2).abs() < 1e-12);
            } else {
                assert_eq!(b.value, n.value);
            }
        }
    }

    #[test]
    fn predict_records_include_oracle_and_tv() {
        let mut spec = base_spec();
        spec.task = Task::Single(TaskKind::Predict);
        spec.source = SourceSpec::Synthetic(SourceModel::IidCategorical {
            probs: vec![0.2, 0.8],
            first_symbol: 0,
        });
        spec.n_max = 64;
        spec.replicates = 3;
        let records = run_predict(&spec).unwrap();
        assert!(records.iter().any(|r| r.metric == "mistake_rate"));
        assert!(records.iter().any(|r| r.metric == "oracle_unpredictability"));
        assert!(records.iter().any(|r| r.metric == "tv_to_truth"));
        let aggregates: Vec<_> = records.iter().filter(|r| r.flag == "aggregate").collect();
        assert!(!aggregates.is_empty());
        assert!(aggregates.iter().all(|r| r.replicate == 3));
    }

    #[test]
    fn sweep_multiplies_records() {
        let mut spec = base_spec();
        spec.n_max = 64;
        spec.task = Task::Sweep {
            of: TaskKind::Estimate,
            axes: vec![SweepAxis {
                key: "margin".into(),
                values: vec!["0".into(), "2".into(), "4".into(), "8".into()],
            }],
        };
        let sweep = run_sweep(&spec).unwrap();
        spec.task = Task::Single(TaskKind::Estimate);
        let single = run_estimate(&spec).unwrap();
        assert_eq!(sweep.len(), 4 * single.len());
        assert!(sweep.iter().all(|r| r.flag.contains("margin=")));
        // Empty grid is rejected.
        spec.task = Task::Sweep {
            of: TaskKind::Estimate,
            axes: vec![],
        };
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn sequence_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("data.f64");
        let vals = vec![0.25, -1.5, 3.75, f64::MIN_POSITIVE];
        write_sequence_binary(&bin, &vals).unwrap();
        match read_sequence_file(&bin).unwrap() {
            Sequence::Real(v) => assert_eq!(v, vals),
            _ => panic!("expected real sequence"),
        }
        let txt = dir.path().join("data.txt");
        std::fs::write(&txt, "1\n2\n42\n").unwrap();
        assert_eq!(
            read_sequence_file(&txt).unwrap(),
            Sequence::Symbolic(vec![1, 2, 42])
        );
        let txtf = dir.path().join("dataf.txt");
        std::fs::write(&txtf, "1\n2.5\n-3\n").unwrap();
        assert_eq!(
            read_sequence_file(&txtf).unwrap(),
            Sequence::Real(vec![1.0, 2.5, -3.0])
        );
    }

    #[test]
    fn parser_smoke() {
        assert!(matches!(
            parse_source("iid(0.3,0.7)").unwrap(),
            SourceSpec::Synthetic(SourceModel::IidCategorical { .. })
        ));
        assert!(matches!(
            parse_source("ar1(0.5,1)").unwrap(),
            SourceSpec::Synthetic(SourceModel::GaussianAr1 { .. })
        ));
        assert!(parse_source("bogus(1)").is_err());
        assert!(matches!(parse_reference("gaussian(0,1)"), Ok(RefKey::Gaussian(_, _))));
        assert!(matches!(parse_window("exact"), Ok(WindowSpec::Exact)));
        assert!(matches!(parse_window("512"), Ok(WindowSpec::Cap(512))));
        let axes = parse_sweep_axes("margin=0,2;window=exact,64").unwrap();
        assert_eq!(axes.len(), 2);
        assert_eq!(axes[1].values, vec!["exact", "64"]);
    }

    #[test]
    fn config_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.conf");
        std::fs::write(&p, "# experiment\nsource = iid(0.5,0.5)\nn-max = 256\n").unwrap();
        let kv = read_config_file(&p).unwrap();
        assert_eq!(kv[0], ("source".to_string(), "iid(0.5,0.5)".to_string()));
        assert_eq!(kv[1].1, "256");
    }
}
