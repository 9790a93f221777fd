use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::minimize::certified_minimum;
use super::{Gaussian, PowerFamily, SubPosterior};
use crate::interval::Interval;

/// Light-tailed density `f(x) ∝ exp(-s x^4 / 2)` on the real line.
///
/// With `s = 1/C` this is one factor of the power decomposition of
/// `exp(-x^4/2)`; its rate is `phi(x) = 2 s^2 x^6 - 3 s x^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartic {
    scale: f64,
    envelope_sd: f64,
}

impl Quartic {
    /// # Panics
    /// If `scale` is not positive and finite.
    pub fn new(scale: f64) -> Self {
        assert!(scale > 0.0 && scale.is_finite(), "quartic scale must be positive, got {scale}");
        Quartic {
            scale,
            // minimises the Gaussian-envelope rejection constant
            envelope_sd: (2.0 * scale).powf(-0.25),
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `phi` as a function of `w = x^2`.
    fn phi_of_square(&self, w: f64) -> f64 {
        let s = self.scale;
        (2.0 * s * s * w * w - 3.0 * s) * w
    }

    /// Location of the minimum of `phi` in `w = x^2`.
    fn critical_square(&self) -> f64 {
        1.0 / (2.0 * self.scale).sqrt()
    }
}

impl SubPosterior for Quartic {
    fn dim(&self) -> usize {
        1
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let x2 = x[0] * x[0];
        -0.5 * self.scale * x2 * x2
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        grad[0] = -2.0 * self.scale * x[0] * x[0] * x[0];
    }

    fn laplacian_log_density(&self, x: &[f64]) -> f64 {
        -6.0 * self.scale * x[0] * x[0]
    }

    fn sample(&self, rng: &mut dyn RngCore, out: &mut [f64]) {
        // log f(x) - log envelope(x) peaks at 1/4 for the chosen envelope width
        let inv_var = 1.0 / (self.envelope_sd * self.envelope_sd);
        loop {
            let z: f64 = rng.sample(StandardNormal);
            let x = z * self.envelope_sd;
            let x2 = x * x;
            let log_ratio = -0.5 * self.scale * x2 * x2 + 0.5 * x2 * inv_var - 0.25;
            let u: f64 = rng.random();
            if u.ln() <= log_ratio {
                out[0] = x;
                return;
            }
        }
    }

    fn phi_lower_bound(&self) -> f64 {
        -(2.0 * self.scale).sqrt()
    }

    fn phi_bounds(&self, rect: &[Interval]) -> Interval {
        let w = rect[0].squared_offset(0.0);
        let (a, b) = (self.phi_of_square(w.lo), self.phi_of_square(w.hi));
        let wc = self.critical_square();
        let lo = if w.contains(wc) {
            self.phi_of_square(wc)
        } else {
            a.min(b)
        };
        Interval::new(lo, a.max(b))
    }

    fn phi(&self, x: &[f64]) -> f64 {
        self.phi_of_square(x[0] * x[0])
    }

    fn phi_ou_gap_lower_bound(&self, ou: &Gaussian) -> Option<f64> {
        if ou.dim() != 1 {
            return None;
        }
        let (mu, lam) = (ou.mean()[0], ou.precision()[0]);
        let gap = |x: f64| self.phi(&[x]) - ou.phi(&[x]);
        // Outside [-r, r]: gap(x) >= 2s^2 x^6 - (3s + lam^2) x^2 - lam^2 mu^2 - lam/2,
        // which is increasing in x^2 once x^4 >= (3s + lam^2) / (6 s^2).
        let s = self.scale;
        let k = 3.0 * s + lam * lam;
        let tail = |r: f64| {
            let w = r * r;
            2.0 * s * s * w * w * w - k * w - lam * lam * mu * mu - 0.5 * lam
        };
        let at_zero = gap(0.0);
        let mut r = 1.0f64.max(mu.abs());
        while r.powi(4) < k / (6.0 * s * s) || tail(r) < at_zero {
            r *= 1.5;
        }
        let enclosure = |d: Interval| self.phi_bounds(&[d]).minus(ou.phi_bounds(&[d]));
        let m = certified_minimum(gap, enclosure, Interval::new(-r, r), 1e-10);
        Some(m - 1e-12 * (1.0 + m.abs()))
    }
}

impl PowerFamily for Quartic {
    fn powered(&self, exponent: f64) -> Self {
        Quartic::new(self.scale * exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_for_four_factors() {
        let f = Quartic::new(0.25);
        assert!((f.phi_lower_bound() + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((f.phi(&[2f64.powf(0.25)]) - f.phi_lower_bound()).abs() < 1e-12);
    }

    #[test]
    fn bounds_cover_grid() {
        let f = Quartic::new(0.25);
        for (lo, hi) in [(-2.5, -0.1), (-0.3, 1.9), (1.0, 1.5), (-3.0, 3.0)] {
            let b = f.phi_bounds(&[Interval::new(lo, hi)]);
            for i in 0..=400 {
                let x = lo + (hi - lo) * i as f64 / 400.0;
                let v = f.phi(&[x]);
                assert!(b.lo <= v + 1e-12 && v <= b.hi + 1e-12, "{x}: {v} not in {b:?}");
            }
        }
    }

    #[test]
    fn ou_gap_bound_below_grid_minimum() {
        let f = Quartic::new(0.25);
        let ou = Gaussian::new(vec![0.0064], vec![1.05]).unwrap();
        let lb = f.phi_ou_gap_lower_bound(&ou).unwrap();
        let grid_min = (0..=200_000)
            .map(|i| -5.0 + 10.0 * i as f64 / 200_000.0)
            .map(|x| f.phi(&[x]) - ou.phi(&[x]))
            .fold(f64::INFINITY, f64::min);
        assert!(lb <= grid_min && grid_min - lb < 1e-6, "{lb} vs {grid_min}");
    }
}
