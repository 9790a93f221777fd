//! The `mcfusion` binary: exit codes, outputs and reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn mcfusion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcfusion")).args(args).output().unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

/// diagnostics.json without the fields that legitimately differ between
/// two identical runs: the wall clock and the output directory.
fn stable_diagnostics(path: &Path) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(&read(path)).unwrap();
    v["diagnostics"]["wall_clock_seconds"] = serde_json::Value::Null;
    v["config"]["out"] = serde_json::Value::Null;
    v
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for algorithm in ["fuse-bm", "fuse-ou", "cmc", "approx-ou"] {
        let outs: Vec<_> = ["a", "b"].iter().map(|s| dir.path().join(algorithm).join(s)).collect();
        for out in &outs {
            let o = mcfusion(&[
                algorithm, "--target", "quartic", "--n", "200", "--seed", "11", "--n-pre", "1000",
                "--workers", "2", "--out", out.to_str().unwrap(),
            ]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        }
        for f in ["samples.csv", "summary.json"] {
            assert_eq!(read(&outs[0].join(f)), read(&outs[1].join(f)), "{algorithm} {f}");
        }
        assert_eq!(
            stable_diagnostics(&outs[0].join("diagnostics.json")),
            stable_diagnostics(&outs[1].join("diagnostics.json"))
        );
    }
}

#[test]
fn seed_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str| {
        let out = dir.path().join(seed);
        let o = mcfusion(&["direct", "--target", "gaussian", "--n", "50", "--seed", seed, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        read(&out.join("samples.csv"))
    };
    assert_ne!(run("1"), run("2"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(
            "target = \"custom\"\nn = 40\nt = 0.5\nout = {:?}\n[custom]\nmeans = [0.0, 1.0]\nprecisions = [1.0, 1.0]\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = mcfusion(&["fuse-bm", "--config", cfg.to_str().unwrap(), "--n", "25"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let diag: serde_json::Value = serde_json::from_str(&read(&out.join("diagnostics.json"))).unwrap();
    assert_eq!(diag["config"]["n"], 25);
    assert_eq!(diag["config"]["t"], 0.5);
    assert_eq!(diag["config"]["c"], 2);
    assert_eq!(read(&out.join("samples.csv")).lines().count(), 26);
}

#[test]
fn explicit_surrogate_and_infinite_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("inf");
    let o = mcfusion(&[
        "approx-ou", "--target", "gaussian", "--t", "inf", "--mu-hat", "0", "--lambda-hat", "0.25",
        "--n", "100", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = mcfusion(&["surrogate", "--target", "quartic", "--n-pre", "500", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let s: serde_json::Value = serde_json::from_str(&read(&out.join("surrogate.json"))).unwrap();
    assert_eq!(s["lambda_hat"].as_array().unwrap().len(), 4);
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = mcfusion(&[
        "sweep-t", "--target", "gaussian", "--n", "50", "--t-grid", "0.5,2", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&out.join("sweep.csv"));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("t,samples,"));
}

#[test]
fn errors_exit_nonzero_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["fuse-bm", "--target", "quartic", "--n", "0", "--out", out], "n must be at least 1"),
        (vec!["fuse-bm", "--target", "quartic", "--t", "-1", "--out", out], "T must be positive"),
        (vec!["fuse-bm", "--target", "quartic", "--bandwidth", "0", "--out", out], "bandwidth"),
        (vec!["fuse-ou", "--target", "beta52", "--n", "5", "--out", out], "fuse_bm"),
        (vec!["fuse-bm", "--n", "5", "--out", out], "no target"),
        (vec!["fuse-bm", "--target", "quartic", "--config", "/nonexistent.toml"], "config file"),
        (vec!["surrogate", "--target", "quartic", "--n-pre", "1", "--out", out], "n_pre"),
        (vec!["cmc", "--target", "quartic", "--n", "5", "--reference", "/nonexistent.csv", "--out", out], "reference"),
    ];
    for (args, needle) in cases {
        let o = mcfusion(&args);
        assert!(!o.status.success(), "{args:?} succeeded");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(needle), "{args:?}: {err}");
    }
    assert!(!mcfusion(&["bogus"]).status.success());
}
