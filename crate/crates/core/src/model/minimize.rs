//! Certified one-dimensional global minimisation by interval branch and bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::interval::Interval;

struct Cell {
    dom: Interval,
    lower: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.lower == other.lower
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on the lower bound
        other.lower.total_cmp(&self.lower)
    }
}

/// Returns a value `m` with `m <= min_{x in domain} f(x)` and
/// `min f - m <= tol` (up to floating-point rounding), given a function
/// evaluator `f` and an interval enclosure `bound` of `f` over sub-intervals.
pub fn certified_minimum(
    f: impl Fn(f64) -> f64,
    bound: impl Fn(Interval) -> Interval,
    domain: Interval,
    tol: f64,
) -> f64 {
    let mut best = f(domain.lo).min(f(domain.hi)).min(f(domain.midpoint()));
    let mut heap = BinaryHeap::new();
    heap.push(Cell {
        dom: domain,
        lower: bound(domain).lo,
    });
    let mut iterations = 0usize;
    while let Some(cell) = heap.pop() {
        iterations += 1;
        if best - cell.lower <= tol || iterations > 200_000 || cell.dom.width() < 1e-14 {
            // every remaining cell has lower >= this one
            return cell.lower.min(best);
        }
        let mid = cell.dom.midpoint();
        best = best.min(f(mid));
        for dom in [Interval::new(cell.dom.lo, mid), Interval::new(mid, cell.dom.hi)] {
            let lower = bound(dom).lo;
            if lower <= best {
                heap.push(Cell { dom, lower });
            }
        }
    }
    best
}
