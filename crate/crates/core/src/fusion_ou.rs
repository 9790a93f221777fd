//! Monte Carlo fusion with Ornstein-Uhlenbeck proposals.
//!
//! Each factor `c` gets a Gaussian surrogate `N(μ̂, Λ̂_c^{-1})` (diagonal).
//! With `V_c = (1 - e^{-2Λ̂_c T}) / (2Λ̂_c)`, `m_c = μ̂ + e^{-Λ̂_c T}(x^(c) - μ̂)`
//! and `D_c = V_c^{-1} - Λ̂_c`, the proposal draws `x^(c) ~ f_c` and
//! `y ~ N(x̃, D^{-1})` with `D = Σ D_c`, `x̃ = D^{-1} Σ (V_c^{-1} m_c - Λ̂_c μ̂)`.
//! It is accepted with probability `ρ^ou · Q^ou`, where `Q^ou` is the
//! survival probability of `C` OU bridges `x^(c) -> y` killed at rate
//! `phi_c - phi_ou_c - Φ^ou_c`.
//!
//! All matrices are diagonal, so every operation is per coordinate.

use std::time::Instant;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bridges::{BridgeEndpoints, BridgeLaw};
use crate::diagnostics::{Algorithm, RunDiagnostics, WorkTally};
use crate::draws::Draws;
use crate::error::{invalid, FusionError, Result};
use crate::fusion_bm::draw_factors;
use crate::model::{FusionProblem, Gaussian, SubPosterior};
use crate::thinning::thin_bridge;

/// Horizons below this are rejected: `V_c` underflows relative to `Λ̂_c`.
pub const MIN_HORIZON: f64 = 1e-8;

/// Horizon `T` of the OU proposal; `Infinite` uses the analytic limits
/// `V_c = (2Λ̂_c)^{-1}`, `m_c = μ̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Horizon {
    Finite(f64),
    Infinite,
}

/// Shared mean `μ̂` and per-factor diagonal precisions `Λ̂_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateParams {
    pub mu_hat: Vec<f64>,
    pub lambda_hat: Vec<Vec<f64>>,
}

impl SurrogateParams {
    pub fn new(mu_hat: Vec<f64>, lambda_hat: Vec<Vec<f64>>) -> Result<Self> {
        if lambda_hat.is_empty() {
            return invalid("surrogate needs at least one factor precision");
        }
        for (c, l) in lambda_hat.iter().enumerate() {
            if l.len() != mu_hat.len() {
                return invalid(format!(
                    "precision of factor {c} has dimension {} but mu_hat has {}",
                    l.len(),
                    mu_hat.len()
                ));
            }
            Gaussian::new(mu_hat.clone(), l.clone())?;
        }
        Ok(SurrogateParams { mu_hat, lambda_hat })
    }

    /// The same precision for every one of `count` factors.
    pub fn shared(mu_hat: Vec<f64>, lambda: Vec<f64>, count: usize) -> Result<Self> {
        SurrogateParams::new(mu_hat, vec![lambda; count])
    }

    pub fn factor_count(&self) -> usize {
        self.lambda_hat.len()
    }

    pub fn dim(&self) -> usize {
        self.mu_hat.len()
    }

    /// The OU potential `A^ou_c`: a Gaussian log-density `N(μ̂, Λ̂_c^{-1})`.
    pub fn potential(&self, c: usize) -> Gaussian {
        Gaussian::new(self.mu_hat.clone(), self.lambda_hat[c].clone()).expect("validated")
    }

    pub fn check_against(&self, problem: &FusionProblem) -> Result<()> {
        if self.factor_count() != problem.factor_count() || self.dim() != problem.dim() {
            return invalid(format!(
                "surrogate has {} factors of dimension {}, problem has {} of dimension {}",
                self.factor_count(),
                self.dim(),
                problem.factor_count(),
                problem.dim()
            ));
        }
        Ok(())
    }
}

/// Surrogate quantities for one set of factor draws, indexed `[c][i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OuSurrogate {
    pub horizon: Horizon,
    pub mu_hat: Vec<f64>,
    pub lambda: Vec<Vec<f64>>,
    pub x_factors: Vec<Vec<f64>>,
    /// `e^{-Λ̂_c T}`.
    pub decay: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub m: Vec<Vec<f64>>,
    pub d_factor: Vec<Vec<f64>>,
    pub d: Vec<f64>,
    pub x_tilde: Vec<f64>,
}

pub fn build_ou_surrogate(
    params: &SurrogateParams,
    horizon: Horizon,
    x_factors: &[Vec<f64>],
) -> Result<OuSurrogate> {
    if x_factors.len() != params.factor_count() {
        return invalid(format!(
            "{} factor draws for a surrogate with {} factors",
            x_factors.len(),
            params.factor_count()
        ));
    }
    if let Horizon::Finite(t) = horizon {
        if !(t > 0.0) || t.is_nan() {
            return invalid(format!("horizon T must be positive, got {t}"));
        }
    }
    let dim = params.dim();
    let mu = &params.mu_hat;
    let (mut decay, mut v, mut m, mut d_factor) = (vec![], vec![], vec![], vec![]);
    for (c, x) in x_factors.iter().enumerate() {
        let lam = &params.lambda_hat[c];
        let mut row = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
        for i in 0..dim {
            let (e, vi) = match horizon {
                Horizon::Finite(t) => (
                    (-lam[i] * t).exp(),
                    -(-2.0 * lam[i] * t).exp_m1() / (2.0 * lam[i]),
                ),
                Horizon::Infinite => (0.0, 0.5 / lam[i]),
            };
            row.0[i] = e;
            row.1[i] = vi;
            row.2[i] = mu[i] + e * (x[i] - mu[i]);
            row.3[i] = 1.0 / vi - lam[i];
        }
        decay.push(row.0);
        v.push(row.1);
        m.push(row.2);
        d_factor.push(row.3);
    }
    let mut d = vec![0.0; dim];
    let mut x_tilde = vec![0.0; dim];
    for i in 0..dim {
        let mut num = 0.0;
        for c in 0..x_factors.len() {
            d[i] += d_factor[c][i];
            num += m[c][i] / v[c][i] - params.lambda_hat[c][i] * mu[i];
        }
        x_tilde[i] = num / d[i];
    }
    let t_value = match horizon {
        Horizon::Finite(t) => t,
        Horizon::Infinite => f64::INFINITY,
    };
    for i in 0..dim {
        if t_value < MIN_HORIZON || !(d[i] > 0.0 && d[i].is_finite()) || !x_tilde[i].is_finite() {
            return Err(FusionError::SurrogateInconsistent {
                horizon: t_value,
                coord: i,
                value: d[i],
            });
        }
    }
    Ok(OuSurrogate {
        horizon,
        mu_hat: mu.clone(),
        lambda: params.lambda_hat.clone(),
        x_factors: x_factors.to_vec(),
        decay,
        v,
        m,
        d_factor,
        d,
        x_tilde,
    })
}

impl OuSurrogate {
    fn count(&self) -> usize {
        self.x_factors.len()
    }

    fn dim(&self) -> usize {
        self.mu_hat.len()
    }

    fn lambda_sum(&self, i: usize) -> f64 {
        self.lambda.iter().map(|l| l[i]).sum()
    }

    /// `M1_c = e^{2Λ̂_c T} Λ̂_c - V_c^{-1} (Σ Λ̂) D^{-1}` at coordinate `i`.
    pub fn m1(&self, c: usize, i: usize) -> Option<f64> {
        let Horizon::Finite(t) = self.horizon else {
            return None;
        };
        let lam = self.lambda[c][i];
        Some((2.0 * lam * t).exp() * lam - self.lambda_sum(i) / (self.v[c][i] * self.d[i]))
    }

    /// `M2_c = V_c^{-1} (Σ Λ̂) D^{-1} - 2 Λ̂_c e^{2Λ̂_c T}` at coordinate `i`.
    pub fn m2(&self, c: usize, i: usize) -> Option<f64> {
        let Horizon::Finite(t) = self.horizon else {
            return None;
        };
        let lam = self.lambda[c][i];
        Some(self.lambda_sum(i) / (self.v[c][i] * self.d[i]) - 2.0 * lam * (2.0 * lam * t).exp())
    }

    /// `H = (Σ a_c² / V_c)(Σ 1/V_c) - (Σ a_c / V_c)²` with `a_c = m_c - V_c Λ̂_c μ̂`.
    pub fn h(&self, i: usize) -> f64 {
        let (mut s_aa, mut s_inv, mut s_a) = (0.0, 0.0, 0.0);
        for c in 0..self.count() {
            let v = self.v[c][i];
            let a = self.m[c][i] - v * self.lambda[c][i] * self.mu_hat[i];
            s_aa += a * a / v;
            s_inv += 1.0 / v;
            s_a += a / v;
        }
        s_aa * s_inv - s_a * s_a
    }

    /// The exponent `B` of `ρ^ou = exp(-B/2)` in expanded form:
    /// `B = Σ_i H_i / D_i + Σ_c Σ_i M1_c (m_c + M2_c / M1_c · V_c Λ̂_c μ̂)²`.
    pub fn rho_exponent_expanded(&self) -> Result<f64> {
        let mut b = 0.0;
        for i in 0..self.dim() {
            b += self.h(i) / self.d[i];
            for c in 0..self.count() {
                let m1 = self.m1(c, i).expect("finite horizon");
                let m2 = self.m2(c, i).expect("finite horizon");
                let lam = self.lambda[c][i];
                let Horizon::Finite(t) = self.horizon else { unreachable!() };
                let scale = (2.0 * lam * t).exp() * lam + self.lambda_sum(i) / (self.v[c][i] * self.d[i]);
                if m1.abs() <= 1e-12 * scale {
                    return Err(FusionError::SingularM1 {
                        factor: c,
                        coord: i,
                        value: m1,
                        scale,
                    });
                }
                let w = self.m[c][i] + m2 / m1 * self.v[c][i] * lam * self.mu_hat[i];
                b += m1 * w * w;
            }
        }
        Ok(b)
    }

    /// The exponent obtained by integrating `y` out directly, in centred
    /// coordinates `u_c = x^(c) - μ̂` with `e_c = e^{-Λ̂_c T}`:
    /// `B = Σ_i [Σ_c (e_c² u_c² / V_c + Λ̂_c u_c²) - (Σ_c e_c u_c / V_c)² / D]`.
    ///
    /// Non-negative and stable for any `T` including `∞`. Coincides with the
    /// expanded form when all factors share one precision; with distinct
    /// precisions only this form equals `-2 log` of the normalised integral.
    pub fn rho_exponent_reduced(&self) -> f64 {
        let mut b = 0.0;
        for i in 0..self.dim() {
            let (mut quad, mut cross) = (0.0, 0.0);
            for c in 0..self.count() {
                let u = self.x_factors[c][i] - self.mu_hat[i];
                let (e, v, lam) = (self.decay[c][i], self.v[c][i], self.lambda[c][i]);
                quad += e * e * u * u / v + lam * u * u;
                cross += e * u / v;
            }
            b += quad - cross * cross / self.d[i];
        }
        b
    }

    /// The exponent used by the samplers (the reduced form).
    pub fn rho_exponent(&self) -> f64 {
        self.rho_exponent_reduced()
    }
}

/// `ρ^ou = exp(-B/2)`; values above one (from rounding) are clamped.
pub fn rho_ou(s: &OuSurrogate) -> Result<f64> {
    Ok((-0.5 * s.rho_exponent()).exp().min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OuProposal {
    pub y: Vec<f64>,
    pub surrogate: OuSurrogate,
}

impl OuProposal {
    pub fn x_factors(&self) -> &[Vec<f64>] {
        &self.surrogate.x_factors
    }
}

pub fn propose_ou(
    problem: &FusionProblem,
    params: &SurrogateParams,
    horizon: Horizon,
    rng: &mut dyn RngCore,
    tally: &mut WorkTally,
) -> Result<OuProposal> {
    params.check_against(problem)?;
    let x_factors = draw_factors(problem, rng, tally);
    let surrogate = build_ou_surrogate(params, horizon, &x_factors)?;
    let y = surrogate
        .x_tilde
        .iter()
        .zip(&surrogate.d)
        .map(|(m, d)| m + rng.sample::<f64, _>(StandardNormal) / d.sqrt())
        .collect();
    Ok(OuProposal { y, surrogate })
}

/// Lower bounds `Φ^ou_c` of `phi_c - phi_ou_c` for every factor.
pub fn ou_floors(problem: &FusionProblem, params: &SurrogateParams) -> Result<Vec<f64>> {
    params.check_against(problem)?;
    (0..problem.factor_count())
        .map(|c| {
            problem
                .factor(c)
                .phi_ou_gap_lower_bound(&params.potential(c))
                .ok_or(FusionError::MissingOuBound { factor: c })
        })
        .collect()
}

/// Path-space event with probability `Q^ou`.
pub fn q_event_ou(
    proposal: &OuProposal,
    problem: &FusionProblem,
    params: &SurrogateParams,
    floors: &[f64],
    rng: &mut dyn RngCore,
    tally: &mut WorkTally,
) -> Result<bool> {
    let Horizon::Finite(t) = proposal.surrogate.horizon else {
        return invalid("the path-space event needs a finite horizon");
    };
    for (c, x) in proposal.x_factors().iter().enumerate() {
        let ou = params.potential(c);
        let e = BridgeEndpoints::new(x.clone(), proposal.y.clone(), t)?;
        let factor = problem.factor(c);
        let floor = floors[c];
        let survived = thin_bridge(
            &e,
            &BridgeLaw::Ou(ou.clone()),
            problem.layer_schedule(),
            |rect| factor.phi_ou_gap_bounds(&ou, rect).hi - floor,
            |x| Ok(problem.phi_dl(c, x)? - ou.phi(x) - floor),
            rng,
            tally,
        )?;
        if !survived {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `n` exact draws from the fusion target using the problem's horizon.
pub fn fuse_ou(
    problem: &FusionProblem,
    params: &SurrogateParams,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<(Draws, RunDiagnostics)> {
    if n < 1 {
        return invalid("number of draws must be at least 1");
    }
    let start = Instant::now();
    let floors = ou_floors(problem, params)?;
    let horizon = Horizon::Finite(problem.horizon());
    let mut diag = RunDiagnostics::new(Algorithm::Ou, 0);
    let mut out = Draws::with_capacity(problem.dim(), n);
    while out.len() < n {
        let p = propose_ou(problem, params, horizon, rng, &mut diag.work)?;
        diag.stage1_attempts += 1;
        let b = p.surrogate.rho_exponent();
        if b < 0.0 {
            diag.rho_clamped += 1;
        }
        let u: f64 = rng.random();
        if u.ln() > -0.5 * b {
            continue;
        }
        diag.stage1_accepts += 1;
        diag.stage2_attempts += 1;
        if q_event_ou(&p, problem, params, &floors, rng, &mut diag.work)? {
            diag.stage2_accepts += 1;
            out.push(&p.y);
        }
    }
    diag.samples = n as u64;
    diag.poisson_points_total = diag.work.poisson_points;
    diag.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok((out, diag))
}
