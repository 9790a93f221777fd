//! Ornstein-Uhlenbeck bridges for `dX = -Λ(X - μ) dt + dW` with diagonal `Λ`.

use rand::RngCore;

use super::brownian::{check_times, BridgeEndpoints};
use super::skeleton::{BridgeLaw, BridgeSkeleton};
use super::LayerSchedule;
use crate::diagnostics::WorkTally;
use crate::error::{invalid, FusionError, Result};
use crate::model::{Gaussian, SubPosterior};
use crate::thinning::thin_on_skeleton;

/// Proposal cap for the Brownian-to-OU bridge rejection loop.
pub const OU_BRIDGE_CAP: u64 = 10_000_000;

/// `V(t) = (1 - e^{-2λt}) / (2λ)`.
pub(crate) fn ou_variance(lambda: f64, t: f64) -> f64 {
    -(-2.0 * lambda * t).exp_m1() / (2.0 * lambda)
}

/// Mean and variance of `X_t` given `X_0 = x0`, per coordinate:
/// `m = μ + e^{-Λt}(x0 - μ)`, `V = (1 - e^{-2Λt}) / (2Λ)`.
pub fn ou_moments(
    lambda: &[f64],
    mu: &[f64],
    x0: &[f64],
    t: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if lambda.len() != mu.len() || mu.len() != x0.len() {
        return invalid("ou_moments needs lambda, mu and x0 of equal length");
    }
    if let Some(l) = lambda.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return invalid(format!("OU precision entries must be positive, got {l}"));
    }
    if !(t >= 0.0) {
        return invalid(format!("OU time must be non-negative, got {t}"));
    }
    let mean = (0..lambda.len())
        .map(|i| mu[i] + (-lambda[i] * t).exp() * (x0[i] - mu[i]))
        .collect();
    let var = lambda.iter().map(|&l| ou_variance(l, t)).collect();
    Ok((mean, var))
}

/// Law of `X_t` given `X_s = xs` and `X_u = xu` for one OU coordinate.
pub(crate) fn ou_conditional(
    lambda: f64,
    mu: f64,
    left: (f64, f64),
    right: (f64, f64),
    t: f64,
) -> (f64, f64) {
    let (s, xs) = left;
    let (u, xu) = right;
    let (h1, h2) = (t - s, u - t);
    let (v1, v2, v) = (
        ou_variance(lambda, h1),
        ou_variance(lambda, h2),
        ou_variance(lambda, h1 + h2),
    );
    let (a, b) = (xs - mu, xu - mu);
    let mean = mu
        + (-lambda * h1).exp() * a
        + (-lambda * h2).exp() * v1 / v * (b - (-lambda * (h1 + h2)).exp() * a);
    (mean, v1 * v2 / v)
}

/// Exact joint draw of the OU bridge at `times` by Gaussian recursion.
pub fn sample_ou_bridge_at_times(
    e: &BridgeEndpoints,
    ou: &Gaussian,
    times: &[f64],
    rng: &mut dyn RngCore,
) -> Result<BridgeSkeleton> {
    check_times(times, e.duration())?;
    if ou.dim() != e.dim() {
        return invalid("OU parameters and bridge endpoints differ in dimension");
    }
    let mut skel = BridgeSkeleton::unlayered(e.clone(), BridgeLaw::Ou(ou.clone()));
    for &t in times {
        skel.insert_plain(t, rng)?;
    }
    Ok(skel)
}

/// Layered OU-bridge skeleton by rejection from layered Brownian bridges.
///
/// The OU bridge has density `∝ exp(-∫ phi_ou(X_t) dt)` against the
/// Brownian bridge, where `phi_ou` is the rate of the potential `ou`. Each
/// proposal is thinned with rate `sup - inf` of `phi_ou` over its layer.
/// After acceptance the skeleton is revealed at `times` as well.
pub fn sample_ou_bridge_skeleton(
    e: &BridgeEndpoints,
    ou: &Gaussian,
    schedule: LayerSchedule,
    times: &[f64],
    rng: &mut dyn RngCore,
    tally: &mut WorkTally,
) -> Result<BridgeSkeleton> {
    check_times(times, e.duration())?;
    if ou.dim() != e.dim() {
        return invalid("OU parameters and bridge endpoints differ in dimension");
    }
    for _ in 0..OU_BRIDGE_CAP {
        let mut skel = BridgeSkeleton::layered(e.clone(), schedule, rng, tally)?;
        let rect = skel.layer_rect().expect("layered skeleton");
        let range = ou.phi_bounds(&rect);
        let floor = range.lo;
        let accepted = thin_on_skeleton(
            &mut skel,
            range.hi - floor,
            |x| Ok((ou.phi(x) - floor).max(0.0)),
            rng,
            tally,
        )?;
        if accepted {
            skel.set_law(BridgeLaw::Ou(ou.clone()));
            for &t in times {
                if skel.value_at(t).is_none() {
                    skel.insert(t, rng, tally)?;
                }
            }
            return Ok(skel);
        }
    }
    Err(FusionError::ProposalCap {
        cap: OU_BRIDGE_CAP,
        context: "simulating an OU bridge by rejection from Brownian bridges",
    })
}
