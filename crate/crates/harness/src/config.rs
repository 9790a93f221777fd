//! Experiment configuration: a partial spec (from a TOML file and/or CLI
//! flags) resolved against per-target defaults.

use std::path::{Path, PathBuf};

use mcfusion::diagnostics::Algorithm;
use serde::{Deserialize, Serialize};

use crate::error::{config_error, HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// `exp(-x^4/2)` split into `C` factors `exp(-x^4/(2C))`.
    Quartic,
    /// Logit of Beta(5, 2) split into `C` logit-Beta factors.
    Beta52,
    /// Standard normal split into `C` factors `N(0, C)`.
    Gaussian,
    /// Product of user-supplied Gaussian factors.
    Custom,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Quartic => "quartic",
            Target::Beta52 => "beta52",
            Target::Gaussian => "gaussian",
            Target::Custom => "custom",
        }
    }

    fn default_count(self) -> usize {
        match self {
            Target::Beta52 => 5,
            _ => 4,
        }
    }

    fn default_horizon(self) -> f64 {
        match self {
            Target::Beta52 => 3.0,
            _ => 1.0,
        }
    }

    /// KDE bandwidth on the scale the target is reported on.
    fn default_bandwidth(self) -> f64 {
        match self {
            Target::Beta52 => 0.04,
            _ => 0.25,
        }
    }
}

/// One-dimensional Gaussian factors `N(mean_c, 1/precision_c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomFactors {
    pub means: Vec<f64>,
    pub precisions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum SurrogateSource {
    /// Moments of `n_pre` direct draws from each factor.
    Preliminary { n_pre: usize },
    /// Shared `μ̂` and one `Λ̂_c` per factor (a single value is shared).
    Explicit { mu_hat: f64, lambda_hat: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub target: Target,
    pub algorithm: Algorithm,
    pub c: usize,
    pub t: f64,
    pub n: usize,
    pub seed: u64,
    pub bandwidth: f64,
    pub surrogate: SurrogateSource,
    pub workers: usize,
    pub out: PathBuf,
    pub reference: Option<PathBuf>,
    pub custom: Option<CustomFactors>,
}

pub const DEFAULT_N: usize = 10_000;
pub const DEFAULT_N_PRE: usize = 10_000;
pub const DEFAULT_SEED: u64 = 1;

/// Every field optional; later sources override earlier ones via `merge`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpec {
    pub target: Option<Target>,
    pub algorithm: Option<Algorithm>,
    pub c: Option<usize>,
    pub t: Option<f64>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub bandwidth: Option<f64>,
    pub n_pre: Option<usize>,
    pub mu_hat: Option<f64>,
    pub lambda_hat: Option<Vec<f64>>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub custom: Option<CustomFactors>,
}

impl ConfigSpec {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| HarnessError::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: ConfigSpec) -> ConfigSpec {
        ConfigSpec {
            target: other.target.or(self.target),
            algorithm: other.algorithm.or(self.algorithm),
            c: other.c.or(self.c),
            t: other.t.or(self.t),
            n: other.n.or(self.n),
            seed: other.seed.or(self.seed),
            bandwidth: other.bandwidth.or(self.bandwidth),
            n_pre: other.n_pre.or(self.n_pre),
            mu_hat: other.mu_hat.or(self.mu_hat),
            lambda_hat: other.lambda_hat.or(self.lambda_hat),
            workers: other.workers.or(self.workers),
            out: other.out.or(self.out),
            reference: other.reference.or(self.reference),
            custom: other.custom.or(self.custom),
        }
    }

    pub fn resolve(self) -> Result<ExperimentConfig> {
        let Some(target) = self.target else {
            return config_error("no target given (use --target quartic|beta52|gaussian|custom)");
        };
        let Some(algorithm) = self.algorithm else {
            return config_error("no algorithm given");
        };
        let c = match (&self.custom, self.c) {
            (Some(f), Some(c)) if c != f.means.len() => {
                return config_error(format!(
                    "c = {c} but the custom target lists {} factors",
                    f.means.len()
                ))
            }
            (Some(f), _) => f.means.len(),
            (None, c) => c.unwrap_or(target.default_count()),
        };
        let surrogate = match (self.mu_hat, self.lambda_hat) {
            (Some(mu_hat), Some(lambda_hat)) => SurrogateSource::Explicit { mu_hat, lambda_hat },
            (None, None) => SurrogateSource::Preliminary {
                n_pre: self.n_pre.unwrap_or(DEFAULT_N_PRE),
            },
            _ => return config_error("mu_hat and lambda_hat must be given together"),
        };
        let config = ExperimentConfig {
            target,
            algorithm,
            c,
            t: self.t.unwrap_or(target.default_horizon()),
            n: self.n.unwrap_or(DEFAULT_N),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            bandwidth: self.bandwidth.unwrap_or(target.default_bandwidth()),
            surrogate,
            workers: self.workers.unwrap_or(1),
            out: self.out.unwrap_or_else(|| PathBuf::from("out")),
            reference: self.reference,
            custom: self.custom,
        };
        config.validate()?;
        Ok(config)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return config_error("n must be at least 1");
        }
        if self.c < 1 {
            return config_error("c must be at least 1");
        }
        if self.workers < 1 {
            return config_error("workers must be at least 1");
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return config_error(format!("bandwidth must be positive, got {}", self.bandwidth));
        }
        if !(self.t > 0.0) {
            return config_error(format!("T must be positive, got {}", self.t));
        }
        if self.t.is_infinite() && matches!(self.algorithm, Algorithm::Bm | Algorithm::Ou) {
            return config_error("T = inf is only meaningful for approx-ou");
        }
        match (&self.custom, self.target) {
            (None, Target::Custom) => {
                return config_error("the custom target needs a [custom] table with means and precisions")
            }
            (Some(_), t) if t != Target::Custom => {
                return config_error("custom factors given but target is not custom")
            }
            (Some(f), _) => {
                if f.means.is_empty() || f.means.len() != f.precisions.len() {
                    return config_error("custom means and precisions must be non-empty and of equal length");
                }
            }
            _ => {}
        }
        match &self.surrogate {
            SurrogateSource::Preliminary { n_pre } if *n_pre < 2 => {
                config_error(format!("n_pre must be at least 2, got {n_pre}"))
            }
            SurrogateSource::Explicit { lambda_hat, .. }
                if lambda_hat.len() != 1 && lambda_hat.len() != self.c =>
            {
                config_error(format!(
                    "lambda_hat needs 1 or {} values, got {}",
                    self.c,
                    lambda_hat.len()
                ))
            }
            _ => Ok(()),
        }
    }
}
