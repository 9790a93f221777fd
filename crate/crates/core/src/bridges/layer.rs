use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::series::{decide_below, StaySeries};
use super::LayerSchedule;
use crate::error::{invalid, Result};
use crate::interval::Interval;

/// Highest layer index tried before giving up; widths double per level.
pub const MAX_LEVEL: u32 = 64;

/// Range information for one coordinate of a Brownian bridge: the path
/// stays inside `outer` and (for `level > 1`) leaves `inner` somewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselLayer {
    pub level: u32,
    pub outer: Interval,
    pub inner: Option<Interval>,
}

impl BesselLayer {
    pub fn lower(&self) -> f64 {
        self.outer.lo
    }

    pub fn upper(&self) -> f64 {
        self.outer.hi
    }

    /// Builds the layer of the given level for a bridge between `start`
    /// and `end` over `duration`.
    pub fn at_level(
        schedule: LayerSchedule,
        start: f64,
        end: f64,
        duration: f64,
        level: u32,
    ) -> BesselLayer {
        let span = |l: u32| {
            let w = schedule.width(l, duration);
            Interval::new(start.min(end) - w, start.max(end) + w)
        };
        BesselLayer {
            level,
            outer: span(level),
            inner: (level > 1).then(|| span(level - 1)),
        }
    }
}

/// Draws the layer index of a one-dimensional bridge exactly: level `l` is
/// returned with probability `P(range ⊂ outer_l) - P(range ⊂ outer_{l-1})`.
pub fn sample_bessel_layer(
    start: f64,
    end: f64,
    duration: f64,
    schedule: LayerSchedule,
    rng: &mut dyn RngCore,
) -> Result<BesselLayer> {
    if !(duration > 0.0 && duration.is_finite()) {
        return invalid(format!("bridge duration must be positive, got {duration}"));
    }
    if !(start.is_finite() && end.is_finite()) {
        return invalid(format!("bridge endpoints must be finite, got {start} -> {end}"));
    }
    let u: f64 = rng.random();
    for level in 1..=MAX_LEVEL {
        let layer = BesselLayer::at_level(schedule, start, end, duration, level);
        let mut stay = StaySeries::new(start, end, layer.outer, duration);
        if decide_below(u, &mut [&mut stay], |b| b[0])? {
            return Ok(layer);
        }
    }
    Ok(BesselLayer::at_level(schedule, start, end, duration, MAX_LEVEL))
}
