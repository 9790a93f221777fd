//! Exact finite-dimensional simulation of Brownian and Ornstein-Uhlenbeck
//! bridges, with Bessel layers bounding the unrevealed path.

mod brownian;
mod layer;
mod ou;
pub mod series;
mod skeleton;

use serde::{Deserialize, Serialize};

pub use brownian::{brownian_bridge_marginal, sample_bridge_at_times, BridgeEndpoints};
pub use layer::{sample_bessel_layer, BesselLayer, MAX_LEVEL};
pub use ou::{ou_moments, sample_ou_bridge_at_times, sample_ou_bridge_skeleton};
pub use skeleton::{sample_point_given_layer, BridgeLaw, BridgeSkeleton};

/// Layer widths `scale · √duration · 2^{level-1}` beyond the endpoint range,
/// and the mesh on which a bridge is revealed before layering.
///
/// Doubling keeps the probability of high levels decaying like
/// `exp(-c 4^level)`, so the layer index has light tails. Pieces between
/// mesh points are at most `max_step` long; each gets its own layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSchedule {
    pub scale: f64,
    pub max_step: f64,
}

impl Default for LayerSchedule {
    fn default() -> Self {
        LayerSchedule {
            scale: 1.0,
            max_step: 0.1,
        }
    }
}

impl LayerSchedule {
    /// Interior mesh times splitting `[0, duration]` into equal pieces no
    /// longer than `max_step`.
    pub fn mesh(&self, duration: f64) -> Vec<f64> {
        let pieces = if self.max_step > 0.0 && self.max_step.is_finite() {
            (duration / self.max_step).ceil().clamp(1.0, 1e6) as usize
        } else {
            1
        };
        let h = duration / pieces as f64;
        (1..pieces).map(|i| i as f64 * h).collect()
    }

    pub fn width(&self, level: u32, duration: f64) -> f64 {
        if level == 0 {
            return 0.0;
        }
        self.scale * duration.sqrt() * 2f64.powi(level as i32 - 1)
    }
}
