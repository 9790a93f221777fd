use std::f64::consts::PI;

use crate::error::{config_error, Result};

/// Gaussian-kernel density estimate of `samples` at each grid point.
pub fn kde(samples: &[f64], bandwidth: f64, grid: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return config_error("kernel density estimate needs at least one sample");
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return config_error(format!("bandwidth must be positive, got {bandwidth}"));
    }
    let norm = 1.0 / (samples.len() as f64 * bandwidth * (2.0 * PI).sqrt());
    Ok(grid
        .iter()
        .map(|&g| {
            let s: f64 = samples
                .iter()
                .map(|&x| {
                    let z = (g - x) / bandwidth;
                    (-0.5 * z * z).exp()
                })
                .sum();
            s * norm
        })
        .collect())
}
