//! End-to-end checks of the command line surface: subcommands, config
//! files, input data, and exit codes.

use std::process::Command;

fn entrod() -> Command {
    Command::new(env!("CARGO_BIN_EXE_entrod"))
}

#[test]
fn estimate_writes_csv_with_fixed_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("records.csv");
    let status = entrod()
        .args([
            "estimate",
            "--source",
            "iid(0.5,0.5)",
            "--scheme",
            "finite",
            "--ref",
            "counting",
            "--n-max",
            "64",
            "--seed",
            "1",
            "--output",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "spec_hash,replicate,n,metric,value,flag");
    assert!(text.lines().count() > 3);
}

#[test]
fn incompatible_axes_exit_code_one() {
    let output = entrod()
        .args([
            "estimate",
            "--source",
            "gauss(0,1)",
            "--scheme",
            "incremental",
            "--ref",
            "geometric(0.5)",
            "--n-max",
            "64",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("error"), "stderr: {err}");
}

#[test]
fn predict_emits_mistake_rates() {
    let output = entrod()
        .args([
            "predict",
            "--source",
            "markov(tests/data/chain2.txt)",
            "--scheme",
            "finite",
            "--ref",
            "counting",
            "--n-max",
            "128",
            "--seed",
            "4",
            "--format",
            "jsonl",
        ])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("\"metric\":\"mistake_rate\""));
    assert!(text.contains("\"metric\":\"oracle_unpredictability\""));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(
        &conf,
        "source = iid(0.3,0.7)\nscheme = finite\nref = counting\nn-max = 32\nseed = 9\n",
    )
    .unwrap();
    let a = entrod()
        .args(["estimate", "--config"])
        .arg(&conf)
        .output()
        .unwrap();
    assert!(a.status.success());
    // Flag overrides the file's n-max: more grid records appear.
    let b = entrod()
        .args(["estimate", "--config"])
        .arg(&conf)
        .args(["--n-max", "128"])
        .output()
        .unwrap();
    assert!(b.status.success());
    assert!(b.stdout.len() > a.stdout.len());
}

#[test]
fn input_file_estimation() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("seq.txt");
    let symbols: Vec<String> = (0..256).map(|i| ((i / 2) % 2).to_string()).collect();
    std::fs::write(&data, symbols.join("\n")).unwrap();
    let output = entrod()
        .args(["estimate", "--input"])
        .arg(&data)
        .args([
            "--scheme", "finite", "--ref", "counting", "--n-max", "256", "--units", "bits",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("entropy_rate"));
}

#[test]
fn sweep_covers_grid_cells() {
    let output = entrod()
        .args([
            "sweep",
            "--source",
            "gauss(0,1)",
            "--scheme",
            "quantile",
            "--ref",
            "gaussian(0,1)",
            "--n-max",
            "64",
            "--seed",
            "2",
            "--grid",
            "margin=0,4",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("margin=0"));
    assert!(text.contains("margin=4"));
    // Empty grid is a configuration error.
    let bad = entrod()
        .args([
            "sweep",
            "--source",
            "gauss(0,1)",
            "--scheme",
            "quantile",
            "--ref",
            "gaussian(0,1)",
            "--grid",
            "",
        ])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
