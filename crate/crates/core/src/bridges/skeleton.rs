use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::brownian::BridgeEndpoints;
use super::layer::{sample_bessel_layer, BesselLayer};
use super::ou::ou_conditional;
use super::series::{decide_below, StaySeries};
use super::LayerSchedule;
use crate::diagnostics::WorkTally;
use crate::error::{invalid, FusionError, Result};
use crate::interval::Interval;
use crate::model::Gaussian;

/// Proposal cap for a single layer-conditioned point insertion.
pub const INSERTION_CAP: u64 = 10_000_000;

/// Law of the path between revealed points.
#[derive(Debug, Clone, PartialEq)]
pub enum BridgeLaw {
    Brownian,
    /// Ornstein-Uhlenbeck bridge with stationary law `N(mean, precision^-1)`.
    Ou(Gaussian),
}

/// Layer bookkeeping of one coordinate: stay probabilities of every piece
/// for the outer interval, and for the inner one when `level > 1`.
#[derive(Debug, Clone)]
struct CoordinateLayer {
    layer: BesselLayer,
    outer: Vec<StaySeries>,
    inner: Vec<StaySeries>,
}

/// The revealed part of a `d`-dimensional diffusion bridge: its values at
/// finitely many times, including both endpoints, plus optional layers.
///
/// With layers, the unrevealed path between consecutive points is a
/// Brownian bridge conditioned on the layer event, whatever the law tag
/// says: layered Ornstein-Uhlenbeck skeletons are produced by rejection
/// from layered Brownian ones.
#[derive(Debug, Clone)]
pub struct BridgeSkeleton {
    endpoints: BridgeEndpoints,
    times: Vec<f64>,
    values: Vec<f64>,
    layers: Option<Vec<CoordinateLayer>>,
    law: BridgeLaw,
}

impl BridgeSkeleton {
    pub fn unlayered(endpoints: BridgeEndpoints, law: BridgeLaw) -> Self {
        let mut values = endpoints.start().to_vec();
        values.extend_from_slice(endpoints.end());
        BridgeSkeleton {
            times: vec![0.0, endpoints.duration()],
            values,
            endpoints,
            layers: None,
            law,
        }
    }

    /// Brownian bridge skeleton with an exactly sampled layer per coordinate.
    pub fn layered(
        endpoints: BridgeEndpoints,
        schedule: LayerSchedule,
        rng: &mut dyn RngCore,
        tally: &mut WorkTally,
    ) -> Result<Self> {
        let duration = endpoints.duration();
        let mut layers = Vec::with_capacity(endpoints.dim());
        for k in 0..endpoints.dim() {
            let (a, b) = (endpoints.start()[k], endpoints.end()[k]);
            let layer = sample_bessel_layer(a, b, duration, schedule, rng)?;
            tally.layers_drawn += 1;
            layers.push(CoordinateLayer {
                layer,
                outer: vec![StaySeries::new(a, b, layer.outer, duration)],
                inner: layer
                    .inner
                    .map(|i| vec![StaySeries::new(a, b, i, duration)])
                    .unwrap_or_default(),
            });
        }
        let mut skel = BridgeSkeleton::unlayered(endpoints, BridgeLaw::Brownian);
        skel.layers = Some(layers);
        Ok(skel)
    }

    pub(crate) fn set_law(&mut self, law: BridgeLaw) {
        self.law = law;
    }

    pub fn law(&self) -> &BridgeLaw {
        &self.law
    }

    pub fn endpoints(&self) -> &BridgeEndpoints {
        &self.endpoints
    }

    pub fn dim(&self) -> usize {
        self.endpoints.dim()
    }

    pub fn duration(&self) -> f64 {
        self.endpoints.duration()
    }

    /// Number of revealed points, endpoints included.
    pub fn point_count(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn value(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.values[i * d..(i + 1) * d]
    }

    /// Value at an already revealed time.
    pub fn value_at(&self, t: f64) -> Option<&[f64]> {
        self.times
            .binary_search_by(|s| s.total_cmp(&t))
            .ok()
            .map(|i| self.value(i))
    }

    pub fn layers(&self) -> Option<Vec<BesselLayer>> {
        self.layers
            .as_ref()
            .map(|ls| ls.iter().map(|l| l.layer).collect())
    }

    /// Rectangle containing the whole path, when layered.
    pub fn layer_rect(&self) -> Option<Vec<Interval>> {
        self.layers
            .as_ref()
            .map(|ls| ls.iter().map(|l| l.layer.outer).collect())
    }

    /// Reveals the path at time `t`, respecting the layer when present.
    pub fn insert(&mut self, t: f64, rng: &mut dyn RngCore, tally: &mut WorkTally) -> Result<&[f64]> {
        if self.layers.is_none() {
            return self.insert_plain(t, rng);
        }
        let j = self.piece_of(t)?;
        let d = self.dim();
        let (s, u) = (self.times[j], self.times[j + 1]);
        let mut x = vec![0.0; d];
        let layers = self.layers.as_mut().expect("checked above");
        for (k, cl) in layers.iter_mut().enumerate() {
            let xs = self.values[j * d + k];
            let xu = self.values[(j + 1) * d + k];
            x[k] = cl.insert(j, (s, xs), (u, xu), t, rng, tally)?;
        }
        Ok(self.splice(j, t, &x))
    }

    /// Reveals the path at time `t` from the unconditioned bridge law.
    pub(crate) fn insert_plain(&mut self, t: f64, rng: &mut dyn RngCore) -> Result<&[f64]> {
        let j = self.piece_of(t)?;
        let d = self.dim();
        let (s, u) = (self.times[j], self.times[j + 1]);
        let mut x = vec![0.0; d];
        for (k, xk) in x.iter_mut().enumerate() {
            let xs = self.values[j * d + k];
            let xu = self.values[(j + 1) * d + k];
            let (mean, var) = match &self.law {
                BridgeLaw::Brownian => brownian_conditional((s, xs), (u, xu), t),
                BridgeLaw::Ou(g) => {
                    ou_conditional(g.precision()[k], g.mean()[k], (s, xs), (u, xu), t)
                }
            };
            let z: f64 = rng.sample(StandardNormal);
            *xk = mean + var.max(0.0).sqrt() * z;
        }
        Ok(self.splice(j, t, &x))
    }

    /// Index `j` of the piece `(times[j], times[j+1])` strictly containing `t`.
    fn piece_of(&self, t: f64) -> Result<usize> {
        let big_t = self.duration();
        if !(t > 0.0 && t < big_t) {
            return invalid(format!("time {t} must lie strictly inside (0, {big_t})"));
        }
        match self.times.binary_search_by(|s| s.total_cmp(&t)) {
            Ok(_) => invalid(format!("time {t} is already revealed in this skeleton")),
            Err(i) => Ok(i - 1),
        }
    }

    fn splice(&mut self, j: usize, t: f64, x: &[f64]) -> &[f64] {
        let d = self.dim();
        self.times.insert(j + 1, t);
        let at = (j + 1) * d;
        self.values.splice(at..at, x.iter().copied());
        &self.values[at..at + d]
    }
}

fn brownian_conditional(left: (f64, f64), right: (f64, f64), t: f64) -> (f64, f64) {
    let (s, xs) = left;
    let (u, xu) = right;
    let w = (t - s) / (u - s);
    (xs + w * (xu - xs), (t - s) * (u - t) / (u - s))
}

fn product(bs: &[Interval]) -> Interval {
    bs.iter().fold(Interval::point(1.0), |acc, b| {
        Interval::new(acc.lo * b.lo, acc.hi * b.hi)
    })
}

impl CoordinateLayer {
    /// Draws the value at `t` inside piece `j` from the bridge law
    /// conditioned on the layer event, by proposing from the plain bridge
    /// marginal and accepting with probability
    /// `qL qR - κ rL rR`, `κ = Π_{i≠j} r_i / Π_{i≠j} q_i`.
    fn insert(
        &mut self,
        j: usize,
        left: (f64, f64),
        right: (f64, f64),
        t: f64,
        rng: &mut dyn RngCore,
        tally: &mut WorkTally,
    ) -> Result<f64> {
        let (mean, var) = brownian_conditional(left, right, t);
        let sd = var.sqrt();
        let outer = self.layer.outer;
        let inner = self.layer.inner;
        let mut proposals = 0u64;
        loop {
            proposals += 1;
            tally.bridge_proposals += 1;
            if proposals > INSERTION_CAP {
                return Err(FusionError::ProposalCap {
                    cap: INSERTION_CAP,
                    context: "inserting a layer-conditioned bridge point",
                });
            }
            let z: f64 = rng.sample(StandardNormal);
            let x = mean + sd * z;
            if !(x > outer.lo && x < outer.hi) {
                continue;
            }
            let mut ql = StaySeries::new(left.1, x, outer, t - left.0);
            let mut qr = StaySeries::new(x, right.1, outer, right.0 - t);
            let u: f64 = rng.random();
            let Some(inner) = inner else {
                if decide_below(u, &mut [&mut ql, &mut qr], |b| product(b))? {
                    self.outer.splice(j..=j, [ql, qr]);
                    return Ok(x);
                }
                continue;
            };
            let mut rl = StaySeries::new(left.1, x, inner, t - left.0);
            let mut rr = StaySeries::new(x, right.1, inner, right.0 - t);
            let m = self.outer.len();
            let accepted = {
                let mut refs: Vec<&mut StaySeries> = vec![&mut ql, &mut qr, &mut rl, &mut rr];
                refs.extend(
                    self.outer
                        .iter_mut()
                        .enumerate()
                        .filter(|(i, _)| *i != j)
                        .map(|(_, s)| s),
                );
                refs.extend(
                    self.inner
                        .iter_mut()
                        .enumerate()
                        .filter(|(i, _)| *i != j)
                        .map(|(_, s)| s),
                );
                decide_below(u, &mut refs, |b| {
                    let q_new = product(&b[0..2]);
                    let r_new = product(&b[2..4]);
                    let q_rest = product(&b[4..4 + m - 1]);
                    let r_rest = product(&b[4 + m - 1..]);
                    // κ r_new, with 0 · ∞ read as 0
                    let scaled = |r: f64, num: f64, den: f64| {
                        if r == 0.0 || num == 0.0 {
                            0.0
                        } else {
                            r * num / den
                        }
                    };
                    Interval::new(
                        q_new.lo - scaled(r_new.hi, r_rest.hi, q_rest.lo),
                        q_new.hi - scaled(r_new.lo, r_rest.lo, q_rest.hi),
                    )
                })?
            };
            if accepted {
                self.outer.splice(j..=j, [ql, qr]);
                self.inner.splice(j..=j, [rl, rr]);
                return Ok(x);
            }
        }
    }
}

/// Reveals the layered bridge at `t` (layer must be present).
pub fn sample_point_given_layer(
    skel: &mut BridgeSkeleton,
    t: f64,
    rng: &mut dyn RngCore,
    tally: &mut WorkTally,
) -> Result<Vec<f64>> {
    if skel.layers.is_none() {
        return invalid("sample_point_given_layer needs a layered skeleton");
    }
    skel.insert(t, rng, tally).map(|x| x.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn endpoints(a: f64, b: f64, t: f64) -> BridgeEndpoints {
        BridgeEndpoints::new(vec![a], vec![b], t).unwrap()
    }

    #[test]
    fn duplicate_insertion_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let mut tally = WorkTally::default();
        let mut s =
            BridgeSkeleton::layered(endpoints(0.0, 1.0, 1.0), LayerSchedule::default(), &mut rng, &mut tally)
                .unwrap();
        s.insert(0.4, &mut rng, &mut tally).unwrap();
        assert!(s.insert(0.4, &mut rng, &mut tally).is_err());
        assert!(s.insert(1.0, &mut rng, &mut tally).is_err());
    }

    #[test]
    fn layered_points_stay_in_layer() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let mut tally = WorkTally::default();
        for _ in 0..300 {
            let mut s = BridgeSkeleton::layered(
                endpoints(0.5, -0.5, 2.0),
                LayerSchedule::default(),
                &mut rng,
                &mut tally,
            )
            .unwrap();
            let rect = s.layer_rect().unwrap()[0];
            for t in [1.0, 0.3, 1.7, 0.05, 1.2] {
                let x = s.insert(t, &mut rng, &mut tally).unwrap()[0];
                assert!(rect.lo < x && x < rect.hi);
            }
            let times = s.times();
            assert!(times.windows(2).all(|w| w[0] < w[1]));
            let layers = s.layers.as_ref().unwrap();
            assert_eq!(layers[0].outer.len(), s.point_count() - 1);
        }
    }

    #[test]
    fn values_follow_times() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let e = BridgeEndpoints::new(vec![0.0, 10.0], vec![1.0, 11.0], 1.0).unwrap();
        let mut s = BridgeSkeleton::unlayered(e, BridgeLaw::Brownian);
        s.insert_plain(0.5, &mut rng).unwrap();
        s.insert_plain(0.25, &mut rng).unwrap();
        assert_eq!(s.times(), &[0.0, 0.25, 0.5, 1.0]);
        assert_eq!(s.value(3), &[1.0, 11.0]);
        assert!(s.value_at(0.25).unwrap()[1] > 5.0);
    }
}
