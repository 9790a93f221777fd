//! Approximate fusion samplers used for comparison.

use std::time::Instant;

use rand::{Rng, RngCore};

use crate::diagnostics::{Algorithm, RunDiagnostics, WorkTally};
use crate::draws::Draws;
use crate::error::{invalid, Result};
use crate::fusion_bm::draw_factors;
use crate::fusion_ou::{propose_ou, Horizon, SurrogateParams};
use crate::model::FusionProblem;

/// Consensus Monte Carlo combination `y = (Σ Λ_c)^{-1} Σ Λ_c x_c` with
/// diagonal weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCombiner {
    weights: Vec<Vec<f64>>,
    pooled: Vec<f64>,
}

impl WeightedCombiner {
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = weights.first() else {
            return invalid("combiner needs at least one weight vector");
        };
        let dim = first.len();
        let mut pooled = vec![0.0; dim];
        for (c, w) in weights.iter().enumerate() {
            if w.len() != dim {
                return invalid(format!("weight {c} has dimension {} instead of {dim}", w.len()));
            }
            if let Some(v) = w.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                return invalid(format!("combiner weights must be positive, factor {c} has {v}"));
            }
            for (p, v) in pooled.iter_mut().zip(w) {
                *p += v;
            }
        }
        Ok(WeightedCombiner { weights, pooled })
    }

    /// Equal weights: the arithmetic mean.
    pub fn uniform(count: usize, dim: usize) -> Result<Self> {
        WeightedCombiner::new(vec![vec![1.0; dim]; count])
    }

    pub fn from_surrogate(params: &SurrogateParams) -> Result<Self> {
        WeightedCombiner::new(params.lambda_hat.clone())
    }

    /// `(Σ Λ_c)^{-1}` per coordinate.
    pub fn pooled_variance(&self) -> Vec<f64> {
        self.pooled.iter().map(|p| 1.0 / p).collect()
    }

    pub fn combine(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        let mut y = vec![0.0; self.pooled.len()];
        for (x, w) in xs.iter().zip(&self.weights) {
            for i in 0..y.len() {
                y[i] += w[i] * x[i];
            }
        }
        for (yi, p) in y.iter_mut().zip(&self.pooled) {
            *yi /= p;
        }
        y
    }
}

pub fn cmc_sample(
    problem: &FusionProblem,
    combiner: &WeightedCombiner,
    rng: &mut dyn RngCore,
    tally: &mut WorkTally,
) -> Result<Vec<f64>> {
    if combiner.weights.len() != problem.factor_count() || combiner.pooled.len() != problem.dim() {
        return invalid("combiner shape does not match the problem");
    }
    Ok(combiner.combine(&draw_factors(problem, rng, tally)))
}

pub fn cmc(
    problem: &FusionProblem,
    combiner: &WeightedCombiner,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<(Draws, RunDiagnostics)> {
    if n < 1 {
        return invalid("number of draws must be at least 1");
    }
    let start = Instant::now();
    let mut diag = RunDiagnostics::new(Algorithm::Cmc, 0);
    let mut out = Draws::with_capacity(problem.dim(), n);
    for _ in 0..n {
        out.push(&cmc_sample(problem, combiner, rng, &mut diag.work)?);
    }
    diag.samples = n as u64;
    diag.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok((out, diag))
}

/// One draw from `h^ou · ρ^ou`: the OU proposal thinned by the Gaussian gate
/// only, skipping the path-space event.
pub fn approx_ou_sample(
    problem: &FusionProblem,
    params: &SurrogateParams,
    horizon: Horizon,
    rng: &mut dyn RngCore,
    diag: &mut RunDiagnostics,
) -> Result<Vec<f64>> {
    loop {
        let p = propose_ou(problem, params, horizon, rng, &mut diag.work)?;
        diag.stage1_attempts += 1;
        let b = p.surrogate.rho_exponent();
        if b < 0.0 {
            diag.rho_clamped += 1;
        }
        let u: f64 = rng.random();
        if u.ln() <= -0.5 * b {
            diag.stage1_accepts += 1;
            return Ok(p.y);
        }
    }
}

pub fn approx_ou(
    problem: &FusionProblem,
    params: &SurrogateParams,
    horizon: Horizon,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<(Draws, RunDiagnostics)> {
    if n < 1 {
        return invalid("number of draws must be at least 1");
    }
    let start = Instant::now();
    let mut diag = RunDiagnostics::new(Algorithm::ApproxOu, 0);
    let mut out = Draws::with_capacity(problem.dim(), n);
    for _ in 0..n {
        out.push(&approx_ou_sample(problem, params, horizon, rng, &mut diag)?);
    }
    diag.samples = n as u64;
    diag.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok((out, diag))
}
