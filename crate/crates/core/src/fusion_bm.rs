//! Monte Carlo fusion with Brownian-bridge proposals.
//!
//! Proposal: `x^(c) ~ f_c` independently, `y ~ N(x̄, (T/C) I)`. A proposal is
//! accepted with probability `ρ · Q`, where `ρ = exp(-C σ² / 2T)` and `Q` is
//! the probability that `C` Brownian bridges `x^(c) -> y` on `[0, T]` survive
//! killing at rates `phi_c - Φ_c`. Accepted `y` are exact draws from
//! `f ∝ Π f_c`. Any rejection restarts from fresh factor draws.

use std::time::Instant;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::bridges::{BridgeEndpoints, BridgeLaw};
use crate::diagnostics::{Algorithm, RunDiagnostics, WorkTally};
use crate::draws::Draws;
use crate::error::{invalid, Result};
use crate::model::FusionProblem;
use crate::thinning::thin_bridge;

#[derive(Debug, Clone, PartialEq)]
pub struct BmProposal {
    pub x_factors: Vec<Vec<f64>>,
    pub x_bar: Vec<f64>,
    pub y: Vec<f64>,
    /// `C^{-1} Σ ‖x^(c) - x̄‖²`.
    pub sigma2: f64,
}

/// Draws one factor sample per sub-posterior.
pub(crate) fn draw_factors(
    problem: &FusionProblem,
    rng: &mut dyn RngCore,
    tally: &mut WorkTally,
) -> Vec<Vec<f64>> {
    problem
        .factors()
        .iter()
        .map(|f| {
            let mut x = vec![0.0; problem.dim()];
            f.sample(rng, &mut x);
            tally.factor_draws += 1;
            x
        })
        .collect()
}

pub fn propose_bm(
    problem: &FusionProblem,
    rng: &mut dyn RngCore,
    tally: &mut WorkTally,
) -> Result<BmProposal> {
    let x_factors = draw_factors(problem, rng, tally);
    let c = x_factors.len() as f64;
    let d = problem.dim();
    let mut x_bar = vec![0.0; d];
    for x in &x_factors {
        for (m, v) in x_bar.iter_mut().zip(x) {
            *m += v / c;
        }
    }
    let sigma2 = x_factors
        .iter()
        .map(|x| x.iter().zip(&x_bar).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .sum::<f64>()
        / c;
    let sd = (problem.horizon() / c).sqrt();
    let y = x_bar
        .iter()
        .map(|m| m + sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(BmProposal {
        x_factors,
        x_bar,
        y,
        sigma2,
    })
}

/// `ρ = exp(-C σ² / 2T)`.
pub fn rho_bm(sigma2: f64, count: usize, horizon: f64) -> Result<f64> {
    Ok(log_rho_bm(sigma2, count, horizon)?.exp())
}

pub fn log_rho_bm(sigma2: f64, count: usize, horizon: f64) -> Result<f64> {
    if !(horizon > 0.0) {
        return invalid(format!("horizon T must be positive, got {horizon}"));
    }
    if !(sigma2 >= 0.0) {
        return invalid(format!("sigma^2 must be non-negative, got {sigma2}"));
    }
    Ok(-(count as f64) * sigma2 / (2.0 * horizon))
}

/// Global lower bounds `Φ_c` of every factor's `phi`.
pub fn phi_floors(problem: &FusionProblem) -> Vec<f64> {
    problem.factors().iter().map(|f| f.phi_lower_bound()).collect()
}

/// Path-space event with probability `Q`: for each factor in turn, a
/// layered bridge `x^(c) -> y` is thinned at rate `phi_c - Φ_c`.
pub fn q_event_bm(
    proposal: &BmProposal,
    problem: &FusionProblem,
    floors: &[f64],
    rng: &mut dyn RngCore,
    tally: &mut WorkTally,
) -> Result<bool> {
    for (c, x) in proposal.x_factors.iter().enumerate() {
        let e = BridgeEndpoints::new(x.clone(), proposal.y.clone(), problem.horizon())?;
        let factor = problem.factor(c);
        let floor = floors[c];
        let survived = thin_bridge(
            &e,
            &BridgeLaw::Brownian,
            problem.layer_schedule(),
            |rect| factor.phi_bounds(rect).hi - floor,
            |x| Ok(problem.phi_dl(c, x)? - floor),
            rng,
            tally,
        )?;
        if !survived {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `n` exact draws from the fusion target.
pub fn fuse_bm(
    problem: &FusionProblem,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<(Draws, RunDiagnostics)> {
    if n < 1 {
        return invalid("number of draws must be at least 1");
    }
    let start = Instant::now();
    let floors = phi_floors(problem);
    let mut diag = RunDiagnostics::new(Algorithm::Bm, 0);
    let mut out = Draws::with_capacity(problem.dim(), n);
    while out.len() < n {
        let p = propose_bm(problem, rng, &mut diag.work)?;
        diag.stage1_attempts += 1;
        let u: f64 = rng.random();
        if u.ln() > log_rho_bm(p.sigma2, problem.factor_count(), problem.horizon())? {
            continue;
        }
        diag.stage1_accepts += 1;
        diag.stage2_attempts += 1;
        if q_event_bm(&p, problem, &floors, rng, &mut diag.work)? {
            diag.stage2_accepts += 1;
            out.push(&p.y);
        }
    }
    diag.samples = n as u64;
    diag.poisson_points_total = diag.work.poisson_points;
    diag.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok((out, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Gaussian, SubPosterior};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::sync::Arc;

    #[test]
    fn rho_examples() {
        assert_eq!(rho_bm(0.0, 4, 1.0).unwrap(), 1.0);
        assert!((rho_bm(0.5, 4, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!(rho_bm(0.5, 4, 0.0).is_err());
        assert!(rho_bm(0.5, 4, -1.0).is_err());
    }

    #[test]
    fn proposal_statistics() {
        let g: Arc<dyn SubPosterior> = Arc::new(Gaussian::new(vec![0.0, 1.0], vec![2.0, 0.5]).unwrap());
        let problem = FusionProblem::new(vec![g.clone(), g.clone(), g], 0.9).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let mut tally = WorkTally::default();
        let p = propose_bm(&problem, &mut rng, &mut tally).unwrap();
        for k in 0..2 {
            let m: f64 = p.x_factors.iter().map(|x| x[k]).sum::<f64>() / 3.0;
            assert!((p.x_bar[k] - m).abs() < 1e-15);
        }
        let direct: f64 = p
            .x_factors
            .iter()
            .map(|x| (x[0] - p.x_bar[0]).powi(2) + (x[1] - p.x_bar[1]).powi(2))
            .sum::<f64>()
            / 3.0;
        assert!((p.sigma2 - direct).abs() < 1e-14);
        assert_eq!(tally.factor_draws, 3);
    }

    #[test]
    fn single_factor_never_fails_stage_one() {
        let g: Arc<dyn SubPosterior> = Arc::new(Gaussian::new(vec![0.0], vec![1.0]).unwrap());
        let problem = FusionProblem::new(vec![g], 1.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (draws, diag) = fuse_bm(&problem, 50, &mut rng).unwrap();
        assert_eq!(draws.len(), 50);
        // C = 1 gives σ² = 0, so every proposal passes the first stage
        assert_eq!(diag.stage1_attempts, diag.stage1_accepts);
    }
}
