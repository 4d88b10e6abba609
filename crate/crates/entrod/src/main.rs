//! Thin command line over the library: estimate, predict, sweep, and the
//! selftest battery. All semantics live in `entrod::harness`.

use clap::{Args, Parser, Subcommand};
use entrod::error::{Error, Result};
use entrod::harness::{
    self, ExperimentSpec, OutputFormat, RefKey, RunRecord, SchemeKey, SourceSpec, Task, TaskKind,
    Units,
};
use entrod::selftest::{self, Scale};
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "entrod",
    about = "Universal-density entropy rate estimation and 0-1-loss prediction",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate entropy rates along a sample-size grid.
    Estimate(RunArgs),
    /// Run the online predictor and report mistake rates.
    Predict(RunArgs),
    /// Cross a parameter grid, running estimate or predict per cell.
    Sweep(SweepArgs),
    /// Run the verification battery.
    Selftest(SelftestArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Flat key = value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Synthetic source: iid(p0,p1,..), iid1(..), markov(file), geom(q),
    /// gauss(m,sigma), ar1(phi,sigma).
    #[arg(long)]
    source: Option<String>,
    /// External sequence file (text: one value per line; binary: f64 with
    /// magic header). Mutually exclusive with --source.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Partition scheme: finite | dyadic | quantile | incremental.
    #[arg(long)]
    scheme: Option<String>,
    /// Reference measure: counting | geometric(q) | gaussian(m,sigma) |
    /// uniform.
    #[arg(long = "ref")]
    reference: Option<String>,
    #[arg(long = "n-max")]
    n_max: Option<usize>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cesàro window: auto | exact | <cap>.
    #[arg(long)]
    window: Option<String>,
    /// Extra genuinely evaluated mixture levels past the closed-form
    /// threshold.
    #[arg(long)]
    margin: Option<u32>,
    #[arg(long = "level-cap")]
    level_cap: Option<u32>,
    /// Output units: nats | bits.
    #[arg(long)]
    units: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format: csv | jsonl.
    #[arg(long)]
    format: Option<String>,
    /// Fit the Gaussian reference from sample moments (experimental).
    #[arg(long)]
    plugin_moments: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Sweep grid, e.g. "margin=0,2,4,8;window=256,512".
    #[arg(long)]
    grid: String,
    /// Task run in each cell: estimate | predict.
    #[arg(long, default_value = "estimate")]
    task: String,
}

#[derive(Args)]
struct SelftestArgs {
    /// Smoke scale: smaller samples, widened statistical tolerances.
    #[arg(long)]
    quick: bool,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format: csv | jsonl.
    #[arg(long)]
    format: Option<String>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help and version are not errors.
            if e.use_stderr() {
                eprint!("{e}");
                std::process::exit(1);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Estimate(args) => {
            let spec = build_spec(Task::Single(TaskKind::Estimate), &args)?;
            let records = harness::run_estimate(&spec)?;
            emit(&records, spec.format, args.output.as_deref())?;
            Ok(0)
        }
        Cmd::Predict(args) => {
            let spec = build_spec(Task::Single(TaskKind::Predict), &args)?;
            let records = harness::run_predict(&spec)?;
            emit(&records, spec.format, args.output.as_deref())?;
            Ok(0)
        }
        Cmd::Sweep(args) => {
            let of = match args.task.as_str() {
                "estimate" => TaskKind::Estimate,
                "predict" => TaskKind::Predict,
                other => {
                    return Err(Error::Parse(format!(
                        "unknown sweep task '{other}' (estimate, predict)"
                    )))
                }
            };
            let axes = harness::parse_sweep_axes(&args.grid)?;
            let spec = build_spec(Task::Sweep { of, axes }, &args.run)?;
            let records = harness::run_sweep(&spec)?;
            emit(&records, spec.format, args.run.output.as_deref())?;
            Ok(0)
        }
        Cmd::Selftest(args) => {
            let scale = if args.quick { Scale::Quick } else { Scale::Full };
            let reports = selftest::run_all(scale);
            for r in &reports {
                println!("{}", r.line());
            }
            let records: Vec<RunRecord> = reports
                .iter()
                .map(|r| RunRecord {
                    spec_hash: "selftest".into(),
                    replicate: 0,
                    n: r.id,
                    metric: format!("criterion_{:02}", r.id),
                    value: if r.passed { 1.0 } else { 0.0 },
                    flag: if r.passed { String::new() } else { "fail".into() },
                })
                .collect();
            let format = parse_format(args.format.as_deref().unwrap_or("csv"))?;
            if let Some(path) = &args.output {
                let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
                harness::write_records(&mut out, &records, format)?;
                out.flush()?;
            }
            let all_passed = reports.iter().all(|r| r.passed);
            println!(
                "{}: {}/{} criteria passed",
                if all_passed { "ok" } else { "FAILED" },
                reports.iter().filter(|r| r.passed).count(),
                reports.len()
            );
            Ok(if all_passed { 0 } else { 2 })
        }
    }
}

fn emit(records: &[RunRecord], format: OutputFormat, path: Option<&std::path::Path>) -> Result<()> {
    match path {
        Some(p) => {
            let mut out = std::io::BufWriter::new(std::fs::File::create(p)?);
            harness::write_records(&mut out, records, format)?;
            out.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            harness::write_records(&mut lock, records, format)?;
        }
    }
    Ok(())
}

fn parse_format(s: &str) -> Result<OutputFormat> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "jsonl" => Ok(OutputFormat::Jsonl),
        other => Err(Error::Parse(format!("unknown format '{other}' (csv, jsonl)"))),
    }
}

fn parse_units(s: &str) -> Result<Units> {
    match s {
        "nats" => Ok(Units::Nats),
        "bits" => Ok(Units::Bits),
        other => Err(Error::Parse(format!("unknown units '{other}' (nats, bits)"))),
    }
}

/// Defaults, then the config file, then flags.
fn build_spec(task: Task, args: &RunArgs) -> Result<ExperimentSpec> {
    let mut source: Option<String> = None;
    let mut input: Option<PathBuf> = None;
    let mut scheme = "finite".to_string();
    let mut reference = "counting".to_string();
    let mut n_max = 4096usize;
    let mut replicates = 1usize;
    let mut seed = 0u64;
    let mut window = "auto".to_string();
    let mut margin = 4u32;
    let mut level_cap = 40u32;
    let mut units = "nats".to_string();
    let mut format = "csv".to_string();
    let mut plugin = false;

    if let Some(path) = &args.config {
        for (k, v) in harness::read_config_file(path)? {
            match k.as_str() {
                "source" => source = Some(v),
                "input" => input = Some(PathBuf::from(v)),
                "scheme" => scheme = v,
                "ref" => reference = v,
                "n-max" | "n_max" => {
                    n_max = v.parse().map_err(|_| Error::Parse(format!("bad n-max '{v}'")))?
                }
                "replicates" => {
                    replicates = v
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad replicates '{v}'")))?
                }
                "seed" => seed = v.parse().map_err(|_| Error::Parse(format!("bad seed '{v}'")))?,
                "window" => window = v,
                "margin" => {
                    margin = v.parse().map_err(|_| Error::Parse(format!("bad margin '{v}'")))?
                }
                "level-cap" | "level_cap" => {
                    level_cap = v
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad level-cap '{v}'")))?
                }
                "units" => units = v,
                "format" => format = v,
                "plugin-moments" | "plugin_moments" => {
                    plugin = v
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad plugin-moments '{v}'")))?
                }
                other => return Err(Error::Parse(format!("unknown config key '{other}'"))),
            }
        }
    }
    if let Some(v) = &args.source {
        source = Some(v.clone());
    }
    if let Some(v) = &args.input {
        input = Some(v.clone());
    }
    if let Some(v) = &args.scheme {
        scheme = v.clone();
    }
    if let Some(v) = &args.reference {
        reference = v.clone();
    }
    if let Some(v) = args.n_max {
        n_max = v;
    }
    if let Some(v) = args.replicates {
        replicates = v;
    }
    if let Some(v) = args.seed {
        seed = v;
    }
    if let Some(v) = &args.window {
        window = v.clone();
    }
    if let Some(v) = args.margin {
        margin = v;
    }
    if let Some(v) = args.level_cap {
        level_cap = v;
    }
    if let Some(v) = &args.units {
        units = v.clone();
    }
    if let Some(v) = &args.format {
        format = v.clone();
    }
    if args.plugin_moments {
        plugin = true;
    }

    let source_spec = match (source, input) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "--source and --input are mutually exclusive".into(),
            ))
        }
        (Some(s), None) => harness::parse_source(&s)?,
        (None, Some(p)) => SourceSpec::Input(p),
        (None, None) => {
            return Err(Error::Config(
                "one of --source or --input is required".into(),
            ))
        }
    };
    let scheme: SchemeKey = harness::parse_scheme(&scheme)?;
    let reference: RefKey = harness::parse_reference(&reference)?;
    let spec = ExperimentSpec {
        task,
        source: source_spec,
        scheme,
        reference,
        n_max,
        replicates,
        seed,
        window: harness::parse_window(&window)?,
        margin,
        level_cap,
        units: parse_units(&units)?,
        format: parse_format(&format)?,
        plugin_moments: plugin,
    };
    spec.validate()?;
    Ok(spec)
}
