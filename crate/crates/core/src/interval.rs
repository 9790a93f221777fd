use serde::{Deserialize, Serialize};

/// Closed real interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval bounds out of order: [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Range of `(x - centre)^2` for `x` in the interval.
    pub fn squared_offset(&self, centre: f64) -> Interval {
        let a = self.lo - centre;
        let b = self.hi - centre;
        let hi = (a * a).max(b * b);
        let lo = if a <= 0.0 && b >= 0.0 {
            0.0
        } else {
            (a * a).min(b * b)
        };
        Interval { lo, hi }
    }

    pub fn sum(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo + other.lo,
            hi: self.hi + other.hi,
        }
    }

    /// `self - other` in interval arithmetic.
    pub fn minus(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo - other.hi,
            hi: self.hi - other.lo,
        }
    }

    pub fn shift(self, c: f64) -> Interval {
        Interval {
            lo: self.lo + c,
            hi: self.hi + c,
        }
    }
}

/// Range of the quadratic `a x^2 + b x + c` over `dom`.
pub fn quadratic_range(a: f64, b: f64, c: f64, dom: Interval) -> Interval {
    let f = |x: f64| (a * x + b) * x + c;
    let (mut lo, mut hi) = {
        let (p, q) = (f(dom.lo), f(dom.hi));
        (p.min(q), p.max(q))
    };
    if a != 0.0 {
        let v = -b / (2.0 * a);
        if dom.contains(v) {
            let fv = f(v);
            lo = lo.min(fv);
            hi = hi.max(fv);
        }
    }
    Interval { lo, hi }
}
