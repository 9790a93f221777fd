//! Probability that a Brownian bridge stays inside an interval.
//!
//! For a bridge from `x` to `y` over time `tau` and the interval `(L, U)`,
//! write `a = x - L`, `b = y - L`, `D = U - L`. Then
//!
//! ```text
//! P = 1 - Σ_{j≥1} (σ_j - ψ_j)
//! σ_j = exp(-2((j-1)D + a)((j-1)D + b)/tau) + exp(-2(jD - a)(jD - b)/tau)
//! ψ_j = exp(-2jD(jD - (b - a))/tau)       + exp(-2jD(jD + (b - a))/tau)
//! ```
//!
//! Every term is at most `q^{(j-1)^2}` with `q = exp(-2D^2/tau)`, so the
//! remainder after `n` pairs is bounded by `2 q^{n^2} / (1 - q^{2n+1})`.

use crate::error::{FusionError, Result};
use crate::interval::Interval;

/// Maximum number of series pairs evaluated before giving up on a decision.
pub const SERIES_CAP: usize = 1_000_000;

/// Retrospectively refinable bracket for a stay probability.
#[derive(Debug, Clone)]
pub struct StaySeries {
    start: f64,
    end: f64,
    lower: f64,
    upper: f64,
    duration: f64,
    pairs: usize,
    bracket: Interval,
}

impl StaySeries {
    pub fn new(start: f64, end: f64, bounds: Interval, duration: f64) -> Self {
        let mut s = StaySeries {
            start,
            end,
            lower: bounds.lo,
            upper: bounds.hi,
            duration,
            pairs: 1,
            bracket: Interval::new(0.0, 1.0),
        };
        s.bracket = s.evaluate(1);
        s
    }

    pub fn bracket(&self) -> Interval {
        self.bracket
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    /// Whether further refinement can still shrink the bracket.
    pub fn exhausted(&self) -> bool {
        self.pairs >= SERIES_CAP
    }

    /// Doubles the number of evaluated pairs and intersects the new bracket
    /// with the current one.
    pub fn refine(&mut self) {
        if self.exhausted() {
            return;
        }
        self.pairs = (2 * self.pairs).min(SERIES_CAP);
        let next = self.evaluate(self.pairs);
        let lo = self.bracket.lo.max(next.lo);
        let hi = self.bracket.hi.min(next.hi);
        // both brackets contain the truth, so they overlap up to rounding
        self.bracket = if lo <= hi {
            Interval::new(lo, hi)
        } else {
            Interval::point(0.5 * (lo + hi))
        };
    }

    /// Refines until the bracket is no wider than `width` or the cap is hit.
    pub fn refine_to(&mut self, width: f64) {
        while self.bracket.width() > width && !self.exhausted() {
            self.refine();
            if self.pairs > 64 && self.bracket.width() > width {
                // rounding floor reached
                break;
            }
        }
    }

    pub(crate) fn cap_error(&self) -> FusionError {
        FusionError::SeriesCap {
            cap: SERIES_CAP,
            start: self.start,
            end: self.end,
            duration: self.duration,
            lower: self.lower,
            upper: self.upper,
        }
    }

    /// Bracket from the first `n` pairs, including a rounding allowance.
    fn evaluate(&self, n: usize) -> Interval {
        let (a, b) = (self.start - self.lower, self.end - self.lower);
        let d = self.upper - self.lower;
        if !(a > 0.0 && b > 0.0 && a < d && b < d) {
            return Interval::point(0.0);
        }
        if d.is_infinite() {
            return Interval::point(1.0);
        }
        let tau = self.duration;
        let e = |z: f64| (-2.0 * z / tau).exp();
        let mut sum = 0.0;
        for j in 1..=n {
            let jf = j as f64;
            let sigma = e(((jf - 1.0) * d + a) * ((jf - 1.0) * d + b)) + e((jf * d - a) * (jf * d - b));
            let psi = e(jf * d * (jf * d - (b - a))) + e(jf * d * (jf * d + (b - a)));
            let term = sigma - psi;
            sum += term;
            if sigma == 0.0 {
                // every later term underflows as well
                break;
            }
        }
        let nf = n as f64;
        let log_q = -2.0 * d * d / tau;
        let tail = 2.0 * (log_q * nf * nf).exp() / -((2.0 * nf + 1.0) * log_q).exp_m1();
        let slack = 16.0 * nf * f64::EPSILON;
        let centre = 1.0 - sum;
        let lo = (centre - tail - slack).max(0.0);
        let hi = (centre + tail + slack).min(1.0);
        if lo <= hi {
            Interval::new(lo, hi)
        } else {
            Interval::point(centre.clamp(0.0, 1.0))
        }
    }
}

/// Decides `u < value` where `value` is a monotone-enclosed function of
/// several stay probabilities, refining the series until the decision is
/// separated.
pub(crate) fn decide_below(
    u: f64,
    series: &mut [&mut StaySeries],
    value: impl Fn(&[Interval]) -> Interval,
) -> Result<bool> {
    loop {
        let brackets: Vec<Interval> = series.iter().map(|s| s.bracket()).collect();
        let v = value(&brackets);
        if u < v.lo {
            return Ok(true);
        }
        if u >= v.hi {
            return Ok(false);
        }
        if series.iter().all(|s| s.exhausted()) {
            let widest = series
                .iter()
                .max_by(|a, b| a.bracket().width().total_cmp(&b.bracket().width()))
                .expect("decision needs at least one series");
            return Err(widest.cap_error());
        }
        // refine the widest bracket first
        let i = (0..series.len())
            .filter(|&i| !series[i].exhausted())
            .max_by(|&i, &j| series[i].bracket().width().total_cmp(&series[j].bracket().width()))
            .expect("some series is refinable");
        series[i].refine();
    }
}

/// Convenience: converged stay probability (for diagnostics and tests).
pub fn stay_probability(start: f64, end: f64, bounds: Interval, duration: f64) -> Interval {
    let mut s = StaySeries::new(start, end, bounds, duration);
    s.refine_to(1e-13);
    s.bracket()
}
