//! Cost of a sampler as a function of the horizon `T`.

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{config_error, HarnessError, Result};
use crate::experiment::{ensure_dir, simulate};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub samples: u64,
    pub stage1_attempts: u64,
    pub stage2_attempts: u64,
    pub attempts_per_sample: f64,
    pub work_per_sample: f64,
    pub seconds_per_sample: f64,
    pub wall_clock_seconds: f64,
}

/// Runs `config` once per horizon in `grid` (same seed each time).
pub fn sweep_t(config: &ExperimentConfig, grid: &[f64]) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return config_error("the T grid is empty");
    }
    grid.iter()
        .map(|&t| {
            let cfg = ExperimentConfig { t, ..config.clone() };
            let d = simulate(&cfg)?.diagnostics;
            let per = |v: f64| v / d.samples as f64;
            Ok(SweepRow {
                t,
                samples: d.samples,
                stage1_attempts: d.stage1_attempts,
                stage2_attempts: d.stage2_attempts,
                attempts_per_sample: per(d.stage1_attempts as f64),
                work_per_sample: per(d.work.total() as f64),
                seconds_per_sample: per(d.wall_clock_seconds),
                wall_clock_seconds: d.wall_clock_seconds,
            })
        })
        .collect()
}

/// Runs the sweep and writes `sweep.csv` into the output directory.
pub fn run_sweep(config: &ExperimentConfig, grid: &[f64]) -> Result<Vec<SweepRow>> {
    ensure_dir(&config.out)?;
    let rows = sweep_t(config, grid)?;
    let path = config.out.join("sweep.csv");
    let fail = |e: csv::Error| HarnessError::Output {
        path: path.clone(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(&path).map_err(fail)?;
    for row in &rows {
        w.serialize(row).map_err(fail)?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        action: "cannot write",
        path: path.clone(),
        source,
    })?;
    Ok(rows)
}
