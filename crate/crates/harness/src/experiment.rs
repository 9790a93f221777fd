//! Running one configured experiment and persisting its artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use mcfusion::baselines::{approx_ou, cmc, WeightedCombiner};
use mcfusion::diagnostics::{Algorithm, RunDiagnostics};
use mcfusion::fusion_bm::fuse_bm;
use mcfusion::fusion_ou::{fuse_ou, Horizon, SurrogateParams};
use mcfusion::model::FusionProblem;
use mcfusion::replicate::{replicate, stream_rng};
use mcfusion::stats::{ks_two_sample, mean, variance};
use mcfusion::Draws;
use serde::Serialize;

use crate::config::{ExperimentConfig, Target};
use crate::error::{HarnessError, Result};
use crate::kde::kde;
use crate::surrogate::build_surrogate;
use crate::targets::{factors, kde_grid, target_density, to_target_scale};

/// Stream reserved for preliminary surrogate draws, so the surrogate does
/// not depend on the number of workers.
const SURROGATE_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KdeSummary {
    pub bandwidth: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsSummary {
    pub reference: PathBuf,
    pub reference_size: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// Moments and density estimate on the reported scale (`u = σ(y)` for
/// the Beta target, `y` otherwise).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub target: Target,
    pub algorithm: Algorithm,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub kde: KdeSummary,
    pub ks: Option<KsSummary>,
}

#[derive(Debug, Clone, Serialize)]
struct DiagnosticsFile<'a> {
    config: &'a ExperimentConfig,
    diagnostics: &'a RunDiagnostics,
    stage1_rate: Option<f64>,
    stage2_rate: Option<f64>,
    attempts_per_sample: Option<f64>,
    work_per_sample: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub draws: Draws,
    pub diagnostics: RunDiagnostics,
    pub surrogate: Option<SurrogateParams>,
    /// Draws mapped to the reported scale.
    pub values: Vec<f64>,
}

pub fn problem(config: &ExperimentConfig) -> Result<FusionProblem> {
    let horizon = if config.t.is_finite() { config.t } else { 1.0 };
    Ok(FusionProblem::new(factors(config)?, horizon)?)
}

pub fn surrogate(config: &ExperimentConfig, problem: &FusionProblem) -> Result<SurrogateParams> {
    build_surrogate(config, problem, &mut stream_rng(config.seed, SURROGATE_STREAM))
}

/// Draws samples as configured, without writing anything.
pub fn simulate(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let problem = problem(config)?;
    let needs_surrogate = matches!(config.algorithm, Algorithm::Ou | Algorithm::Cmc | Algorithm::ApproxOu);
    let params = if needs_surrogate {
        Some(surrogate(config, &problem)?)
    } else {
        None
    };
    let (n, seed, workers) = (config.n, config.seed, config.workers);
    let (draws, mut diagnostics) = match (config.algorithm, &params) {
        (Algorithm::Bm, _) => replicate(n, seed, workers, |k, rng| fuse_bm(&problem, k, rng))?,
        (Algorithm::Ou, Some(p)) => replicate(n, seed, workers, |k, rng| fuse_ou(&problem, p, k, rng))?,
        (Algorithm::Cmc, Some(p)) => {
            let combiner = WeightedCombiner::from_surrogate(p)?;
            replicate(n, seed, workers, |k, rng| cmc(&problem, &combiner, k, rng))?
        }
        (Algorithm::ApproxOu, Some(p)) => {
            let horizon = if config.t.is_finite() {
                Horizon::Finite(config.t)
            } else {
                Horizon::Infinite
            };
            replicate(n, seed, workers, |k, rng| approx_ou(&problem, p, horizon, k, rng))?
        }
        (Algorithm::Direct, _) => {
            let target = target_density(config)?;
            replicate(n, seed, workers, |k, rng| {
                let mut out = Draws::with_capacity(target.dim(), k);
                let mut row = vec![0.0; target.dim()];
                for _ in 0..k {
                    target.sample(rng, &mut row);
                    out.push(&row);
                }
                let mut diag = RunDiagnostics::new(Algorithm::Direct, 0);
                diag.samples = k as u64;
                diag.work.factor_draws = k as u64;
                Ok((out, diag))
            })?
        }
        (_, None) => unreachable!("surrogate built for every algorithm that needs one"),
    };
    diagnostics.algorithm = config.algorithm;
    let values = draws.rows().map(|r| to_target_scale(config.target, r[0])).collect();
    Ok(RunOutput {
        draws,
        diagnostics,
        surrogate: params,
        values,
    })
}

/// Reads reference draws on the reported scale: column `u` if present, else
/// `y`, else the only column.
pub fn read_reference(path: &Path) -> Result<Vec<f64>> {
    let err = |message: String| HarnessError::Reference {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| err(e.to_string()))?;
    let headers = reader.headers().map_err(|e| err(e.to_string()))?.clone();
    let column = ["u", "y"]
        .iter()
        .find_map(|name| headers.iter().position(|h| h == *name))
        .or(if headers.len() == 1 { Some(0) } else { None })
        .ok_or_else(|| err(format!("no 'u' or 'y' column among {:?}", headers.iter().collect::<Vec<_>>())))?;
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| err(e.to_string()))?;
        let field = record.get(column).unwrap_or("");
        let v: f64 = field
            .trim()
            .parse()
            .map_err(|_| err(format!("line {}: cannot parse '{field}' as a number", line + 2)))?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(err("no samples".to_string()));
    }
    Ok(out)
}

pub fn summarize(config: &ExperimentConfig, values: &[f64]) -> Result<Summary> {
    let grid = kde_grid(config);
    let density = kde(values, config.bandwidth, &grid)?;
    let ks = match &config.reference {
        Some(path) => {
            let reference = read_reference(path)?;
            let r = ks_two_sample(values, &reference)?;
            Some(KsSummary {
                reference: path.clone(),
                reference_size: reference.len(),
                statistic: r.statistic,
                p_value: r.p_value,
            })
        }
        None => None,
    };
    Ok(Summary {
        target: config.target,
        algorithm: config.algorithm,
        n: values.len(),
        mean: mean(values),
        variance: variance(values),
        kde: KdeSummary {
            bandwidth: config.bandwidth,
            grid,
            density,
        },
        ks,
    })
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        action: "cannot create output directory",
        path: dir.to_path_buf(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| HarnessError::Io {
        action: "cannot write",
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    text.push('\n');
    write_text(path, &text)
}

fn write_samples(path: &Path, config: &ExperimentConfig, output: &RunOutput) -> Result<()> {
    let fail = |e: csv::Error| HarnessError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(fail)?;
    let d = output.draws.dim();
    let mut header = vec!["index".to_string()];
    if d == 1 {
        header.push("y".into());
    } else {
        header.extend((0..d).map(|k| format!("y{k}")));
    }
    let back = config.target == Target::Beta52;
    if back {
        header.push("u".into());
    }
    w.write_record(&header).map_err(fail)?;
    for (i, row) in output.draws.rows().enumerate() {
        let mut record = vec![i.to_string()];
        record.extend(row.iter().map(|v| v.to_string()));
        if back {
            record.push(output.values[i].to_string());
        }
        w.write_record(&record).map_err(fail)?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        action: "cannot write",
        path: path.to_path_buf(),
        source,
    })
}

/// Runs the experiment and writes `samples.csv`, `diagnostics.json` and
/// `summary.json` into the configured output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(RunOutput, Summary)> {
    config.validate()?;
    ensure_dir(&config.out)?;
    let output = simulate(config)?;
    let summary = summarize(config, &output.values)?;
    write_samples(&config.out.join("samples.csv"), config, &output)?;
    let diagnostics = &output.diagnostics;
    write_json(
        &config.out.join("diagnostics.json"),
        &DiagnosticsFile {
            config,
            diagnostics,
            stage1_rate: diagnostics.stage1_rate(),
            stage2_rate: diagnostics.stage2_rate(),
            attempts_per_sample: diagnostics.attempts_per_sample(),
            work_per_sample: diagnostics.work_per_sample(),
        },
    )?;
    write_json(&config.out.join("summary.json"), &summary)?;
    Ok((output, summary))
}
