//! Sub-posterior factors, the fusion problem, and built-in targets.
//!
//! A fusion target is a product `f ∝ f_1 ··· f_C` of sub-posterior densities
//! on `R^d`. Each factor is described by its log-density `A_c = log f_c`, the
//! gradient and Laplacian of `A_c`, an exact sampler, and bounds on the
//! path-integral rate
//!
//! ```text
//! phi_c(x) = ½ (‖∇A_c(x)‖² + ΔA_c(x))
//! ```
//!
//! which governs the acceptance of the diffusion-bridge proposals.

mod beta_logit;
mod gaussian;
pub mod minimize;
mod quartic;

use std::fmt;
use std::sync::Arc;

use rand::RngCore;

use crate::bridges::LayerSchedule;
use crate::error::{invalid, FusionError, Result};
use crate::interval::Interval;

pub use beta_logit::BetaLogit;
pub use gaussian::Gaussian;
pub use quartic::Quartic;

/// One factor `f_c` of a fusion target.
///
/// Implementations must be immutable after construction; samplers take an
/// explicit RNG so callers can run independent streams in parallel.
pub trait SubPosterior: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// `log f_c(x)` up to an additive constant.
    fn log_density(&self, x: &[f64]) -> f64;

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]);

    fn laplacian_log_density(&self, x: &[f64]) -> f64;

    /// Exact draw from the density proportional to `f_c`.
    fn sample(&self, rng: &mut dyn RngCore, out: &mut [f64]);

    /// Global lower bound of `phi_c`.
    fn phi_lower_bound(&self) -> f64;

    /// Bounds of `phi_c` over the rectangle `rect` (one interval per coordinate).
    fn phi_bounds(&self, rect: &[Interval]) -> Interval;

    /// `phi_c(x)`. The default evaluates the gradient and Laplacian callbacks.
    fn phi(&self, x: &[f64]) -> f64 {
        let mut grad = vec![0.0; self.dim()];
        self.grad_log_density(x, &mut grad);
        let sq: f64 = grad.iter().map(|g| g * g).sum();
        0.5 * (sq + self.laplacian_log_density(x))
    }

    /// Global lower bound of `phi_c - phi_ou` for the Gaussian potential `ou`,
    /// or `None` when the difference is unbounded below.
    fn phi_ou_gap_lower_bound(&self, _ou: &Gaussian) -> Option<f64> {
        None
    }

    /// Bounds of `phi_c - phi_ou` over `rect`.
    fn phi_ou_gap_bounds(&self, ou: &Gaussian, rect: &[Interval]) -> Interval {
        self.phi_bounds(rect).minus(ou.phi_bounds(rect))
    }
}

/// Evaluates `phi_c(x)` from the factor's gradient and Laplacian callbacks.
///
/// `index` is only used to label the error when either callback returns a
/// non-finite value.
pub fn phi_dl(factor: &dyn SubPosterior, index: usize, x: &[f64]) -> Result<f64> {
    if x.iter().any(|v| !v.is_finite()) {
        return invalid(format!("phi_dl evaluated at non-finite point {x:?}"));
    }
    let mut grad = vec![0.0; factor.dim()];
    factor.grad_log_density(x, &mut grad);
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(FusionError::NumericDomain {
            factor: index,
            quantity: "gradient",
            x: x.to_vec(),
        });
    }
    let lap = factor.laplacian_log_density(x);
    if !lap.is_finite() {
        return Err(FusionError::NumericDomain {
            factor: index,
            quantity: "laplacian",
            x: x.to_vec(),
        });
    }
    let sq: f64 = grad.iter().map(|g| g * g).sum();
    Ok(0.5 * (sq + lap))
}

/// A target whose powers `f^p` stay inside the same family, so that
/// `f = (f^{1/C})^C` gives an exact decomposition into identical factors.
pub trait PowerFamily: SubPosterior + Sized + 'static {
    fn powered(&self, exponent: f64) -> Self;
}

/// Splits `target` into `count` identical factors `f^{1/count}`.
pub fn make_power_decomposition<T: PowerFamily>(
    target: &T,
    count: usize,
) -> Result<Vec<Arc<dyn SubPosterior>>> {
    if count < 1 {
        return invalid("power decomposition needs at least one factor");
    }
    let factor: Arc<dyn SubPosterior> = Arc::new(target.powered(1.0 / count as f64));
    Ok(vec![factor; count])
}

/// `x = log(u / (1 - u))`.
pub fn logit_transform(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return invalid(format!("logit needs u strictly inside (0, 1), got {u}"));
    }
    Ok(u.ln() - (-u).ln_1p())
}

/// `e^x / (1 + e^x)`, evaluated without overflow.
pub fn inverse_logit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `C` sub-posteriors sharing dimension `d`, with horizon `T > 0`.
#[derive(Debug, Clone)]
pub struct FusionProblem {
    factors: Vec<Arc<dyn SubPosterior>>,
    dim: usize,
    horizon: f64,
    layers: LayerSchedule,
}

impl FusionProblem {
    pub fn new(factors: Vec<Arc<dyn SubPosterior>>, horizon: f64) -> Result<Self> {
        let Some(first) = factors.first() else {
            return invalid("a fusion problem needs at least one factor");
        };
        let dim = first.dim();
        if dim == 0 {
            return invalid("factor dimension must be at least 1");
        }
        if let Some((c, f)) = factors.iter().enumerate().find(|(_, f)| f.dim() != dim) {
            return invalid(format!(
                "factor {c} has dimension {} but factor 0 has dimension {dim}",
                f.dim()
            ));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return invalid(format!("horizon T must be positive and finite, got {horizon}"));
        }
        Ok(FusionProblem {
            factors,
            dim,
            horizon,
            layers: LayerSchedule::default(),
        })
    }

    pub fn with_layer_schedule(mut self, layers: LayerSchedule) -> Self {
        self.layers = layers;
        self
    }

    /// Same factors with a different horizon.
    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        Ok(FusionProblem::new(self.factors.clone(), horizon)?.with_layer_schedule(self.layers))
    }

    pub fn factors(&self) -> &[Arc<dyn SubPosterior>] {
        &self.factors
    }

    pub fn factor(&self, c: usize) -> &dyn SubPosterior {
        self.factors[c].as_ref()
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn layer_schedule(&self) -> LayerSchedule {
        self.layers
    }

    /// `phi_c(x)` through the factor callbacks, labelled with the factor index.
    pub fn phi_dl(&self, c: usize, x: &[f64]) -> Result<f64> {
        phi_dl(self.factor(c), c, x)
    }
}
