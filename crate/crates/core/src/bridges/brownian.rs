use rand::RngCore;

use super::skeleton::{BridgeLaw, BridgeSkeleton};
use crate::error::{invalid, Result};

/// Start `x0` at time 0 and end `xT` at time `T` of a `d`-dimensional bridge.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeEndpoints {
    start: Vec<f64>,
    end: Vec<f64>,
    duration: f64,
}

impl BridgeEndpoints {
    pub fn new(start: Vec<f64>, end: Vec<f64>, duration: f64) -> Result<Self> {
        if start.is_empty() || start.len() != end.len() {
            return invalid(format!(
                "bridge endpoints must be non-empty with equal dimension ({} vs {})",
                start.len(),
                end.len()
            ));
        }
        if !(duration > 0.0 && duration.is_finite()) {
            return invalid(format!("bridge duration must be positive and finite, got {duration}"));
        }
        if start.iter().chain(&end).any(|v| !v.is_finite()) {
            return invalid(format!("bridge endpoints must be finite: {start:?} -> {end:?}"));
        }
        Ok(BridgeEndpoints { start, end, duration })
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }

    pub fn end(&self) -> &[f64] {
        &self.end
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn dim(&self) -> usize {
        self.start.len()
    }
}

/// Mean and per-coordinate variance of a Brownian bridge at time `t`.
pub fn brownian_bridge_marginal(e: &BridgeEndpoints, t: f64) -> Result<(Vec<f64>, f64)> {
    let big_t = e.duration;
    if !(t > 0.0 && t < big_t) {
        return invalid(format!("time {t} must lie strictly inside (0, {big_t})"));
    }
    let w = t / big_t;
    let mean = e.start.iter().zip(&e.end).map(|(a, b)| a + w * (b - a)).collect();
    Ok((mean, t * (big_t - t) / big_t))
}

/// Exact joint draw of a Brownian bridge at strictly increasing `times`.
pub fn sample_bridge_at_times(
    e: &BridgeEndpoints,
    times: &[f64],
    rng: &mut dyn RngCore,
) -> Result<BridgeSkeleton> {
    check_times(times, e.duration)?;
    let mut skel = BridgeSkeleton::unlayered(e.clone(), BridgeLaw::Brownian);
    for &t in times {
        skel.insert_plain(t, rng)?;
    }
    Ok(skel)
}

pub(crate) fn check_times(times: &[f64], duration: f64) -> Result<()> {
    if let Some(w) = times.windows(2).find(|w| !(w[0] < w[1])) {
        return invalid(format!(
            "times must be strictly increasing, found {} followed by {}",
            w[0], w[1]
        ));
    }
    if let Some(t) = times.iter().find(|t| !(**t > 0.0 && **t < duration)) {
        return invalid(format!("time {t} must lie strictly inside (0, {duration})"));
    }
    Ok(())
}
