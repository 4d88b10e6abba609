//! Sensitivity sweep: how the truncation margin affects the Gaussian
//! corrected estimate. Emits the standard CSV record stream.
//!
//! ```bash
//! cargo run --example sweep_margin
//! ```

use entrod::harness::{
    run_sweep, ExperimentSpec, OutputFormat, RefKey, SchemeKey, SourceSpec, SweepAxis, Task,
    TaskKind, Units, WindowSpec,
};
use entrod::sources::SourceModel;

fn main() -> entrod::Result<()> {
    let spec = ExperimentSpec {
        task: Task::Sweep {
            of: TaskKind::Estimate,
            axes: vec![SweepAxis {
                key: "margin".into(),
                values: vec!["0".into(), "2".into(), "4".into(), "8".into()],
            }],
        },
        source: SourceSpec::Synthetic(SourceModel::IidGaussian {
            mean: 0.0,
            sigma: 1.0,
        }),
        scheme: SchemeKey::Quantile,
        reference: RefKey::Gaussian(0.0, 1.0),
        n_max: 2_048,
        replicates: 2,
        seed: 12,
        window: WindowSpec::Auto,
        margin: 4,
        level_cap: 40,
        units: Units::Nats,
        format: OutputFormat::Csv,
        plugin_moments: false,
    };
    let records = run_sweep(&spec)?;
    let mut out = std::io::stdout().lock();
    entrod::harness::write_records(&mut out, &records, OutputFormat::Csv)?;
    Ok(())
}
