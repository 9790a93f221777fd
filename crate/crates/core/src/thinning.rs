//! Poisson thinning on a layered bridge skeleton.
//!
//! For a path `X` on `[0, T]` and an integrand `0 <= v(X_t) <= R`, the event
//! "no point of a rate-`R` Poisson process with uniform marks on `[0, R]`
//! falls below the graph of `v(X_t)`" has probability
//! `exp(-∫ v(X_t) dt)`. Only the path values at the Poisson times need to be
//! revealed.

use rand::{Rng, RngCore};

use crate::bridges::{
    sample_bridge_at_times, sample_ou_bridge_at_times, sample_ou_bridge_skeleton, BridgeEndpoints,
    BridgeLaw, BridgeSkeleton, LayerSchedule,
};
use crate::diagnostics::WorkTally;
use crate::error::{FusionError, Result};
use crate::interval::Interval;

/// Simulates the event of probability `exp(-∫₀ᵀ v(X_t) dt)` for the path
/// behind `skel`, revealing it at the Poisson times. Stops at the first
/// point that kills the path.
///
/// `rate_bound` must dominate `v` on every value the path can take.
pub fn thin_on_skeleton(
    skel: &mut BridgeSkeleton,
    rate_bound: f64,
    mut integrand: impl FnMut(&[f64]) -> Result<f64>,
    rng: &mut dyn RngCore,
    tally: &mut WorkTally,
) -> Result<bool> {
    let tol = 1e-9 * (1.0 + rate_bound.abs());
    if rate_bound.is_nan() || rate_bound == f64::INFINITY {
        return Err(FusionError::Internal(format!(
            "thinning rate bound must be finite, got {rate_bound}"
        )));
    }
    if rate_bound < -tol {
        return Err(FusionError::Internal(format!(
            "negative thinning rate bound {rate_bound}: the supremum over the layer lies below \
             the global lower bound"
        )));
    }
    if rate_bound <= 0.0 {
        return Ok(true);
    }
    let horizon = skel.duration();
    let mut t = 0.0;
    loop {
        let gap: f64 = rng.random();
        t += -(1.0 - gap).ln() / rate_bound;
        if t >= horizon {
            return Ok(true);
        }
        tally.poisson_points += 1;
        let x = match skel.value_at(t) {
            Some(x) => x.to_vec(),
            None => skel.insert(t, rng, tally)?.to_vec(),
        };
        let v = integrand(&x)?;
        if !(v >= -tol && v <= rate_bound + tol) {
            return Err(FusionError::Internal(format!(
                "thinning integrand {v} at x = {x:?} escapes [0, {rate_bound}]"
            )));
        }
        let mark = rng.random::<f64>() * rate_bound;
        if mark < v {
            return Ok(false);
        }
    }
}

/// Simulates the event of probability `exp(-∫₀ᵀ v(X_t) dt)` for a bridge
/// `X` with the given law. The bridge is first revealed on the schedule's
/// mesh; given those values the pieces are independent bridges, and each
/// is layered and thinned on its own with rate `bound(layer rectangle)`.
pub fn thin_bridge(
    e: &BridgeEndpoints,
    law: &BridgeLaw,
    schedule: LayerSchedule,
    mut bound: impl FnMut(&[Interval]) -> f64,
    mut integrand: impl FnMut(&[f64]) -> Result<f64>,
    rng: &mut dyn RngCore,
    tally: &mut WorkTally,
) -> Result<bool> {
    let mesh = schedule.mesh(e.duration());
    let path = match law {
        BridgeLaw::Brownian => sample_bridge_at_times(e, &mesh, rng)?,
        BridgeLaw::Ou(g) => sample_ou_bridge_at_times(e, g, &mesh, rng)?,
    };
    for i in 0..path.point_count() - 1 {
        let piece = BridgeEndpoints::new(
            path.value(i).to_vec(),
            path.value(i + 1).to_vec(),
            path.time(i + 1) - path.time(i),
        )?;
        let mut skel = match law {
            BridgeLaw::Brownian => BridgeSkeleton::layered(piece, schedule, rng, tally)?,
            BridgeLaw::Ou(g) => sample_ou_bridge_skeleton(&piece, g, schedule, &[], rng, tally)?,
        };
        let rect = skel.layer_rect().expect("layered skeleton");
        if !thin_on_skeleton(&mut skel, bound(&rect), &mut integrand, rng, tally)? {
            return Ok(false);
        }
    }
    Ok(true)
}
