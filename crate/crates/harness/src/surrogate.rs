//! Gaussian surrogates for the OU proposal and the CMC weights.

use mcfusion::fusion_ou::SurrogateParams;
use mcfusion::model::{FusionProblem, SubPosterior};
use mcfusion::FusionError;
use rand::RngCore;

use crate::config::{ExperimentConfig, SurrogateSource};
use crate::error::{config_error, Result};

/// Sample mean and reciprocal sample variance per coordinate from `n_pre`
/// direct draws of `factor`.
pub fn preliminary_surrogate(
    factor: &dyn SubPosterior,
    n_pre: usize,
    rng: &mut dyn RngCore,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if n_pre < 2 {
        return config_error(format!("preliminary run needs at least 2 draws, got {n_pre}"));
    }
    let d = factor.dim();
    let mut sum = vec![0.0; d];
    let mut draws = vec![0.0; n_pre * d];
    for row in draws.chunks_mut(d) {
        factor.sample(rng, row);
        for (s, x) in sum.iter_mut().zip(row.iter()) {
            *s += x;
        }
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / n_pre as f64).collect();
    let mut precision = Vec::with_capacity(d);
    for (i, m) in mean.iter().enumerate() {
        let ss: f64 = draws.chunks(d).map(|r| (r[i] - m) * (r[i] - m)).sum();
        let var = ss / (n_pre - 1) as f64;
        if !(var > 0.0 && var.is_finite()) {
            return Err(FusionError::DegenerateFactor(format!(
                "coordinate {i} has sample variance {var} over {n_pre} draws"
            ))
            .into());
        }
        precision.push(1.0 / var);
    }
    Ok((mean, precision))
}

/// Combines per-factor estimates into a shared `μ̂` (precision-weighted
/// mean) and per-factor `Λ̂_c`.
pub fn pool_estimates(estimates: &[(Vec<f64>, Vec<f64>)]) -> Result<SurrogateParams> {
    let Some((first, _)) = estimates.first() else {
        return config_error("no factor estimates to pool");
    };
    let d = first.len();
    let mut mu = vec![0.0; d];
    for i in 0..d {
        let (num, den) = estimates
            .iter()
            .fold((0.0, 0.0), |(n, w), (m, p)| (n + m[i] * p[i], w + p[i]));
        mu[i] = num / den;
    }
    Ok(SurrogateParams::new(mu, estimates.iter().map(|(_, p)| p.clone()).collect())?)
}

pub fn build_surrogate(
    config: &ExperimentConfig,
    problem: &FusionProblem,
    rng: &mut dyn RngCore,
) -> Result<SurrogateParams> {
    match &config.surrogate {
        SurrogateSource::Preliminary { n_pre } => {
            let estimates = problem
                .factors()
                .iter()
                .map(|f| preliminary_surrogate(f.as_ref(), *n_pre, rng))
                .collect::<Result<Vec<_>>>()?;
            pool_estimates(&estimates)
        }
        SurrogateSource::Explicit { mu_hat, lambda_hat } => {
            let c = problem.factor_count();
            let lambdas: Vec<Vec<f64>> = if lambda_hat.len() == 1 {
                vec![vec![lambda_hat[0]]; c]
            } else if lambda_hat.len() == c {
                lambda_hat.iter().map(|l| vec![*l]).collect()
            } else {
                return config_error(format!("lambda_hat needs 1 or {c} values, got {}", lambda_hat.len()));
            };
            Ok(SurrogateParams::new(vec![*mu_hat], lambdas)?)
        }
    }
}
