use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::{PowerFamily, SubPosterior};
use crate::error::{invalid, Result};
use crate::interval::{quadratic_range, Interval};

/// Gaussian density with diagonal precision: `log f = -½ Σ λ_i (x_i - μ_i)^2`.
///
/// Also serves as the potential `A^ou` of the Ornstein-Uhlenbeck proposal,
/// whose rate is `phi_ou(x) = ½(‖Λ(μ - x)‖² - tr Λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: Vec<f64>,
    precision: Vec<f64>,
}

impl Gaussian {
    pub fn new(mean: Vec<f64>, precision: Vec<f64>) -> Result<Self> {
        if mean.is_empty() || mean.len() != precision.len() {
            return invalid(format!(
                "Gaussian mean and precision must be non-empty and equal length ({} vs {})",
                mean.len(),
                precision.len()
            ));
        }
        if let Some(p) = precision.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return invalid(format!("precision entries must be positive and finite, got {p}"));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return invalid("Gaussian mean must be finite");
        }
        Ok(Gaussian { mean, precision })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn precision(&self) -> &[f64] {
        &self.precision
    }

    fn trace(&self) -> f64 {
        self.precision.iter().sum()
    }
}

impl SubPosterior for Gaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let q: f64 = x
            .iter()
            .zip(&self.mean)
            .zip(&self.precision)
            .map(|((x, m), l)| l * (x - m) * (x - m))
            .sum();
        -0.5 * q
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        for (i, g) in grad.iter_mut().enumerate() {
            *g = -self.precision[i] * (x[i] - self.mean[i]);
        }
    }

    fn laplacian_log_density(&self, _x: &[f64]) -> f64 {
        -self.trace()
    }

    fn sample(&self, rng: &mut dyn RngCore, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            *o = self.mean[i] + z / self.precision[i].sqrt();
        }
    }

    fn phi_lower_bound(&self) -> f64 {
        -0.5 * self.trace()
    }

    fn phi_bounds(&self, rect: &[Interval]) -> Interval {
        let mut acc = Interval::point(-0.5 * self.trace());
        for (i, r) in rect.iter().enumerate() {
            let l = self.precision[i];
            let sq = r.squared_offset(self.mean[i]);
            acc = acc.sum(Interval::new(0.5 * l * l * sq.lo, 0.5 * l * l * sq.hi));
        }
        acc
    }

    fn phi(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..x.len() {
            let g = self.precision[i] * (x[i] - self.mean[i]);
            s += g * g - self.precision[i];
        }
        0.5 * s
    }

    fn phi_ou_gap_lower_bound(&self, ou: &Gaussian) -> Option<f64> {
        let mut total = 0.0;
        for i in 0..self.dim() {
            let (a, b, c) = self.gap_coefficients(ou, i);
            if a > 0.0 {
                total += c - b * b / (4.0 * a);
            } else if a == 0.0 && b == 0.0 {
                total += c;
            } else {
                return None;
            }
        }
        Some(total)
    }

    fn phi_ou_gap_bounds(&self, ou: &Gaussian, rect: &[Interval]) -> Interval {
        let mut acc = Interval::point(0.0);
        for (i, r) in rect.iter().enumerate() {
            let (a, b, c) = self.gap_coefficients(ou, i);
            acc = acc.sum(quadratic_range(a, b, c, *r));
        }
        acc
    }
}

impl Gaussian {
    /// Coefficients of coordinate `i` of `phi_self - phi_ou` as `a x^2 + b x + c`.
    fn gap_coefficients(&self, ou: &Gaussian, i: usize) -> (f64, f64, f64) {
        let (l, m) = (self.precision[i], self.mean[i]);
        let (k, n) = (ou.precision[i], ou.mean[i]);
        let a = 0.5 * (l * l - k * k);
        let b = -(l * l * m - k * k * n);
        let c = 0.5 * (l * l * m * m - k * k * n * n) - 0.5 * (l - k);
        (a, b, c)
    }
}

impl PowerFamily for Gaussian {
    fn powered(&self, exponent: f64) -> Self {
        Gaussian {
            mean: self.mean.clone(),
            precision: self.precision.iter().map(|p| p * exponent).collect(),
        }
    }
}
