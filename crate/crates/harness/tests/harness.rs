//! Library-level checks of the experiment harness.

use std::f64::consts::PI;
use std::path::Path;

use mcfusion::diagnostics::Algorithm;
use mcfusion::model::Gaussian;
use mcfusion_harness::config::{ConfigSpec, CustomFactors};
use mcfusion_harness::experiment::read_reference;
use mcfusion_harness::{kde, preliminary_surrogate, run_experiment, sweep_t, ExperimentConfig, Target};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

fn config(target: Target, algorithm: Algorithm, n: usize, out: &Path) -> ExperimentConfig {
    ConfigSpec {
        target: Some(target),
        algorithm: Some(algorithm),
        n: Some(n),
        out: Some(out.to_path_buf()),
        n_pre: Some(2_000),
        ..ConfigSpec::default()
    }
    .resolve()
    .unwrap()
}

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

#[test]
fn kde_of_gaussian_is_widened_gaussian() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let xs: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let h = 0.25;
    let grid: Vec<f64> = (0..161).map(|i| -4.0 + 0.05 * i as f64).collect();
    let d = kde(&xs, h, &grid).unwrap();
    let var = 1.0 + h * h;
    let worst = grid
        .iter()
        .zip(&d)
        .map(|(g, v)| (v - (-0.5 * g * g / var).exp() / (2.0 * PI * var).sqrt()).abs())
        .fold(0.0, f64::max);
    assert!(worst < 0.01, "{worst}");
}

#[test]
fn kde_integrates_to_one() {
    let xs = [0.3, -1.2, 2.5, 0.0, 0.01];
    let h = 0.4;
    let (lo, hi) = (-1.2 - 6.0 * h, 2.5 + 6.0 * h);
    let grid: Vec<f64> = (0..2001).map(|i| lo + (hi - lo) * i as f64 / 2000.0).collect();
    let d = kde(&xs, h, &grid).unwrap();
    assert!((trapezoid(&grid, &d) - 1.0).abs() < 1e-3);
}

#[test]
fn preliminary_surrogate_recovers_gaussian() {
    let g = Gaussian::new(vec![2.0], vec![0.25]).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let (mu, lam) = preliminary_surrogate(&g, 100_000, &mut rng).unwrap();
    assert!((mu[0] - 2.0).abs() < 0.02, "{mu:?}");
    assert!((lam[0] - 0.25).abs() < 0.005, "{lam:?}");
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(Target::Gaussian, Algorithm::Bm, 300, dir.path());
    let (out, summary) = run_experiment(&cfg).unwrap();
    assert_eq!(out.draws.len(), 300);
    for f in ["samples.csv", "diagnostics.json", "summary.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let diag: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("diagnostics.json")).unwrap()).unwrap();
    let d = &diag["diagnostics"];
    let rate = d["stage2_accepts"].as_f64().unwrap() / d["stage2_attempts"].as_f64().unwrap();
    assert_eq!(diag["stage2_rate"].as_f64().unwrap(), rate);
    assert!(d["stage1_accepts"].as_u64() <= d["stage1_attempts"].as_u64());
    assert_eq!(diag["config"]["n"], 300);
    let grid = &summary.kde.grid;
    assert_eq!(grid.len(), summary.kde.density.len());
    assert!((trapezoid(grid, &summary.kde.density) - 1.0).abs() < 0.02);
    let back = read_reference(&dir.path().join("samples.csv")).unwrap();
    assert_eq!(back, out.values);
}

#[test]
fn beta_samples_carry_back_transform() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(Target::Beta52, Algorithm::Direct, 50, dir.path());
    let (out, summary) = run_experiment(&cfg).unwrap();
    let text = std::fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    assert!(text.starts_with("index,y,u\n"));
    assert!(text.ends_with('\n'));
    for (row, u) in out.draws.rows().zip(&out.values) {
        assert!((1.0 / (1.0 + (-row[0]).exp()) - u).abs() < 1e-15);
    }
    assert!(summary.mean > 0.0 && summary.mean < 1.0);
}

#[test]
fn reference_ks_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let ref_dir = dir.path().join("ref");
    run_experiment(&config(Target::Gaussian, Algorithm::Direct, 5_000, &ref_dir)).unwrap();
    let mut cfg = config(Target::Gaussian, Algorithm::Cmc, 2_000, &dir.path().join("cmc"));
    cfg.reference = Some(ref_dir.join("samples.csv"));
    let (_, summary) = run_experiment(&cfg).unwrap();
    let ks = summary.ks.unwrap();
    assert_eq!(ks.reference_size, 5_000);
    assert!(ks.p_value > 0.001, "{ks:?}");
}

#[test]
fn bad_reference_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "y\n0.5\nabc\n").unwrap();
    let err = read_reference(&path).unwrap_err().to_string();
    assert!(err.contains("line 3"), "{err}");
    assert!(read_reference(&dir.path().join("missing.csv")).is_err());
}

#[test]
fn unwritable_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let cfg = config(Target::Gaussian, Algorithm::Direct, 10, &blocker.join("sub"));
    let err = run_experiment(&cfg).unwrap_err().to_string();
    assert!(err.contains("cannot create output directory"), "{err}");
}

#[test]
fn custom_target_product() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(Target::Gaussian, Algorithm::Bm, 2_000, dir.path());
    cfg.target = Target::Custom;
    cfg.custom = Some(CustomFactors {
        means: vec![1.0, -1.0, 0.5],
        precisions: vec![1.0, 2.0, 1.0],
    });
    cfg.c = 3;
    let (_, summary) = run_experiment(&cfg).unwrap();
    // product of the three factors: precision 4, mean (1 - 2 + 0.5) / 4
    assert!((summary.mean + 0.125).abs() < 4.0 * (0.25f64 / 2e3).sqrt(), "{}", summary.mean);
    assert!((summary.variance - 0.25).abs() < 4.0 * 0.25 * (2.0 / 2e3f64).sqrt());
}

#[test]
fn sweep_rows_per_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(Target::Gaussian, Algorithm::Bm, 100, dir.path());
    let rows = sweep_t(&cfg, &[0.7]).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].t, 0.7);
    assert_eq!(rows[0].samples, 100);
    assert!(sweep_t(&cfg, &[]).is_err());
}

#[test]
fn small_horizon_cost_is_stage_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(Target::Quartic, Algorithm::Bm, 100, dir.path());
    let rows = sweep_t(&cfg, &[0.02, 1.0]).unwrap();
    let (tiny, unit) = (&rows[0], &rows[1]);
    assert!(tiny.attempts_per_sample > 5.0 * unit.attempts_per_sample);
    // at tiny T nearly every proposal that passes the gate also survives the path step
    assert!((tiny.stage2_attempts as f64) < 2.0 * tiny.samples as f64);
}
