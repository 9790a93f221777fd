use rand::{Rng, RngCore};
use rand_distr::{Distribution, Gamma};

use super::{inverse_logit, PowerFamily, SubPosterior};
use crate::error::{invalid, Result};
use crate::interval::{quadratic_range, Interval};

/// Beta(a, b) density on the logit scale:
/// `f(x) ∝ σ(x)^a (1 - σ(x))^b` with `σ(x) = e^x / (1 + e^x)`.
///
/// If `U ~ Beta(a, b)` then `log(U / (1 - U))` has this density.
#[derive(Debug, Clone)]
pub struct BetaLogit {
    a: f64,
    b: f64,
    gamma_a: Gamma<f64>,
    gamma_b: Gamma<f64>,
}

impl BetaLogit {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return invalid(format!("Beta shape parameters must be positive, got ({a}, {b})"));
        }
        // boosted shapes; the log-uniform correction is applied in `log_gamma`
        let gamma = |s: f64| Gamma::new(s + 1.0, 1.0).expect("shape checked above");
        Ok(BetaLogit {
            a,
            b,
            gamma_a: gamma(a),
            gamma_b: gamma(b),
        })
    }

    pub fn shape(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// `log G` for `G ~ Gamma(shape, 1)`, via `G = G' U^{1/shape}` with
    /// `G' ~ Gamma(shape + 1, 1)`, so small shapes never underflow.
    fn log_gamma(boosted: &Gamma<f64>, shape: f64, rng: &mut dyn RngCore) -> f64 {
        let g = boosted.sample(rng);
        let u: f64 = rng.random();
        g.ln() + u.ln() / shape
    }

    /// `phi` as the quadratic `½(α s^2 + β s + γ)` in `s = σ(x)`.
    fn phi_coefficients(&self) -> (f64, f64, f64) {
        let n = self.a + self.b;
        (
            0.5 * (n * n + n),
            -0.5 * (2.0 * self.a * n + n),
            0.5 * self.a * self.a,
        )
    }
}

impl SubPosterior for BetaLogit {
    fn dim(&self) -> usize {
        1
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        // log(1 + e^x) without overflow
        let x = x[0];
        let softplus = x.max(0.0) + (-x.abs()).exp().ln_1p();
        self.a * x - (self.a + self.b) * softplus
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        grad[0] = self.a - (self.a + self.b) * inverse_logit(x[0]);
    }

    fn laplacian_log_density(&self, x: &[f64]) -> f64 {
        let s = inverse_logit(x[0]);
        -(self.a + self.b) * s * (1.0 - s)
    }

    fn sample(&self, rng: &mut dyn RngCore, out: &mut [f64]) {
        let la = Self::log_gamma(&self.gamma_a, self.a, rng);
        let lb = Self::log_gamma(&self.gamma_b, self.b, rng);
        out[0] = la - lb;
    }

    fn phi_lower_bound(&self) -> f64 {
        self.phi_bounds(&[Interval::new(f64::NEG_INFINITY, f64::INFINITY)]).lo
    }

    fn phi_bounds(&self, rect: &[Interval]) -> Interval {
        let s = Interval::new(inverse_logit(rect[0].lo), inverse_logit(rect[0].hi));
        let (p, q, r) = self.phi_coefficients();
        quadratic_range(p, q, r, s)
    }

    fn phi(&self, x: &[f64]) -> f64 {
        let s = inverse_logit(x[0]);
        let (p, q, r) = self.phi_coefficients();
        (p * s + q) * s + r
    }
}

impl PowerFamily for BetaLogit {
    fn powered(&self, exponent: f64) -> Self {
        BetaLogit::new(self.a * exponent, self.b * exponent).expect("positive exponent")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::phi_dl;

    #[test]
    fn factor_phi_range() {
        let f = BetaLogit::new(1.0, 0.4).unwrap();
        assert!((f.phi_lower_bound() + 0.15625).abs() < 1e-12);
        let all = f.phi_bounds(&[Interval::new(f64::NEG_INFINITY, f64::INFINITY)]);
        assert!((all.hi - 0.5).abs() < 1e-12);
    }

    #[test]
    fn closed_form_phi_matches_callbacks() {
        let f = BetaLogit::new(1.0, 0.4).unwrap();
        for i in -40..=40 {
            let x = i as f64 * 0.25;
            let a = f.phi(&[x]);
            let b = phi_dl(&f, 0, &[x]).unwrap();
            assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "{x}: {a} vs {b}");
        }
    }

    #[test]
    fn log_density_stable_in_tails() {
        let f = BetaLogit::new(5.0, 2.0).unwrap();
        assert!((f.log_density(&[800.0]) - (5.0 * 800.0 - 7.0 * 800.0)).abs() < 1e-9);
        assert!((f.log_density(&[-800.0]) + 5.0 * 800.0).abs() < 1e-9);
    }
}
