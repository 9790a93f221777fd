//! Statistical checks of the bridge samplers against analytic laws.

use mcfusion::bridges::{
    brownian_bridge_marginal, ou_moments, sample_bessel_layer, sample_bridge_at_times,
    sample_ou_bridge_at_times, sample_ou_bridge_skeleton, series::stay_probability, BesselLayer,
    BridgeEndpoints, BridgeSkeleton, LayerSchedule,
};
use mcfusion::diagnostics::WorkTally;
use mcfusion::interval::Interval;
use mcfusion::model::Gaussian;
use mcfusion::stats::{covariance, ks_one_sample, ks_two_sample, mean, variance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

const N: usize = 100_000;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn normal_cdf(mean: f64, var: f64) -> impl Fn(f64) -> f64 {
    let n = Normal::new(mean, var.sqrt()).unwrap();
    move |x| n.cdf(x)
}

fn within_se(estimate: f64, truth: f64, se: f64, k: f64) {
    assert!(
        (estimate - truth).abs() < k * se,
        "estimate {estimate} vs {truth} (se {se})"
    );
}

#[test]
fn bridge_marginal_mean_and_variance() {
    let e = BridgeEndpoints::new(vec![0.5], vec![-1.0], 2.0).unwrap();
    let (m, v) = brownian_bridge_marginal(&e, 0.8).unwrap();
    let mut r = rng(10);
    let xs: Vec<f64> = (0..N)
        .map(|_| sample_bridge_at_times(&e, &[0.8], &mut r).unwrap().value(1)[0])
        .collect();
    within_se(mean(&xs), m[0], (v / N as f64).sqrt(), 3.0);
    within_se(variance(&xs), v, v * (2.0 / N as f64).sqrt(), 3.0);
    assert!(ks_one_sample(&xs, normal_cdf(m[0], v)).unwrap().passes(0.01));
}

#[test]
fn bridge_two_time_covariance() {
    let (s, t, big_t) = (0.3, 0.7, 1.0);
    let e = BridgeEndpoints::new(vec![0.0], vec![0.0], big_t).unwrap();
    let mut r = rng(11);
    let (mut a, mut b) = (Vec::with_capacity(N), Vec::with_capacity(N));
    for _ in 0..N {
        let sk = sample_bridge_at_times(&e, &[s, t], &mut r).unwrap();
        a.push(sk.value(1)[0]);
        b.push(sk.value(2)[0]);
    }
    let want = s * (big_t - t) / big_t;
    // Var of the product estimator for jointly Gaussian variables
    let (va, vb) = (s * (big_t - s), t * (big_t - t));
    let se = ((va * vb + want * want) / N as f64).sqrt();
    within_se(covariance(&a, &b), want, se, 3.0);
}

#[test]
fn insertion_order_is_exchangeable() {
    let e = BridgeEndpoints::new(vec![0.2], vec![1.0], 1.0).unwrap();
    let mut r = rng(12);
    let schedule = LayerSchedule::default();
    let mut tally = WorkTally::default();
    let (mut fwd, mut rev) = (Vec::new(), Vec::new());
    for i in 0..40_000 {
        let mut sk = BridgeSkeleton::layered(e.clone(), schedule, &mut r, &mut tally).unwrap();
        let order = if i % 2 == 0 { [0.25, 0.6] } else { [0.6, 0.25] };
        for t in order {
            sk.insert(t, &mut r, &mut tally).unwrap();
        }
        let (x, y) = (sk.value_at(0.25).unwrap()[0], sk.value_at(0.6).unwrap()[0]);
        if i % 2 == 0 { fwd.push((x, y)) } else { rev.push((x, y)) }
    }
    let proj = |v: &[(f64, f64)], f: fn(&(f64, f64)) -> f64| v.iter().map(f).collect::<Vec<_>>();
    for f in [
        (|p: &(f64, f64)| p.0) as fn(&(f64, f64)) -> f64,
        |p| p.1,
        |p| p.0 + p.1,
        |p| p.0 - p.1,
    ] {
        let res = ks_two_sample(&proj(&fwd, f), &proj(&rev, f)).unwrap();
        assert!(res.passes(0.01), "{res:?}");
    }
}

#[test]
fn layered_points_have_bridge_marginal() {
    // the layer is drawn from its exact law, so integrating it out must give
    // back the unconditioned bridge marginal
    let e = BridgeEndpoints::new(vec![0.0], vec![0.4], 1.0).unwrap();
    let (m, v) = brownian_bridge_marginal(&e, 0.35).unwrap();
    let mut r = rng(13);
    let mut tally = WorkTally::default();
    let xs: Vec<f64> = (0..N)
        .map(|_| {
            let mut sk =
                BridgeSkeleton::layered(e.clone(), LayerSchedule::default(), &mut r, &mut tally).unwrap();
            sk.insert(0.8, &mut r, &mut tally).unwrap();
            sk.insert(0.35, &mut r, &mut tally).unwrap()[0]
        })
        .collect();
    assert!(ks_one_sample(&xs, normal_cdf(m[0], v)).unwrap().passes(0.01));
}

#[test]
fn wide_layer_point_matches_unconditioned_marginal() {
    let e = BridgeEndpoints::new(vec![0.0], vec![0.0], 1.0).unwrap();
    let mut r = rng(14);
    let mut tally = WorkTally::default();
    let wide = LayerSchedule { scale: 8.0, ..LayerSchedule::default() };
    let xs: Vec<f64> = (0..N)
        .map(|_| {
            let mut sk = BridgeSkeleton::layered(e.clone(), wide, &mut r, &mut tally).unwrap();
            assert_eq!(sk.layers().unwrap()[0].level, 1);
            sk.insert(0.5, &mut r, &mut tally).unwrap()[0]
        })
        .collect();
    assert!(ks_one_sample(&xs, normal_cdf(0.0, 0.25)).unwrap().passes(0.01));
}

#[test]
fn layer_frequencies_match_series() {
    let (x0, xt, big_t) = (0.0, 0.0, 1.0);
    let schedule = LayerSchedule { scale: 0.5, ..LayerSchedule::default() };
    let mut r = rng(15);
    let mut counts = [0usize; 8];
    for _ in 0..N {
        let l = sample_bessel_layer(x0, xt, big_t, schedule, &mut r).unwrap();
        counts[(l.level as usize).min(7)] += 1;
    }
    let mut prev = 0.0;
    for level in 1..=3u32 {
        let layer = BesselLayer::at_level(schedule, x0, xt, big_t, level);
        let cum = stay_probability(x0, xt, layer.outer, big_t).midpoint();
        let p = cum - prev;
        prev = cum;
        let freq = counts[level as usize] as f64 / N as f64;
        within_se(freq, p, (p * (1.0 - p) / N as f64).sqrt(), 3.0);
    }
    // level 1 with width a for a bridge pinned at 0: the classical series
    let a: f64 = 0.5;
    let oracle = 1.0 + 2.0 * (1..100)
        .map(|k| {
            let k = k as f64;
            let sign = if k as i64 % 2 == 0 { 1.0 } else { -1.0 };
            sign * (-2.0 * k * k * a * a).exp()
        })
        .sum::<f64>();
    let level1 = stay_probability(0.0, 0.0, Interval::new(-a, a), 1.0).midpoint();
    assert!((level1 - oracle).abs() < 1e-6);
}

#[test]
fn ou_moments_match_euler_maruyama() {
    let (lam, mu, x0, t) = (1.0, 0.0, 1.0, 1.0);
    let (m, v) = ou_moments(&[lam], &[mu], &[x0], t).unwrap();
    let dt = 1e-4;
    let steps = (t / dt) as usize;
    let mut r = rng(16);
    // vectorised over paths so the inner loop is a plain array update
    let paths = 20_000;
    let mut x = vec![x0; paths];
    for _ in 0..steps {
        for xi in x.iter_mut() {
            let z: f64 = r.sample(StandardNormal);
            *xi += -lam * (*xi - mu) * dt + dt.sqrt() * z;
        }
    }
    within_se(mean(&x), m[0], (v[0] / paths as f64).sqrt(), 3.0);
    within_se(variance(&x), v[0], v[0] * (2.0 / paths as f64).sqrt(), 3.0);
}

/// `X_t | X_0, X_T` for an OU bridge from joint Gaussian conditioning.
fn ou_bridge_marginal(lam: f64, mu: f64, x0: f64, xt: f64, big_t: f64, t: f64) -> (f64, f64) {
    let (m_t, v_t) = ou_moments(&[lam], &[mu], &[x0], t).unwrap();
    let (m_big, v_big) = ou_moments(&[lam], &[mu], &[x0], big_t).unwrap();
    let cov = (-lam * (big_t - t)).exp() * v_t[0];
    (
        m_t[0] + cov / v_big[0] * (xt - m_big[0]),
        v_t[0] - cov * cov / v_big[0],
    )
}

#[test]
fn ou_bridge_recursion_marginal() {
    let g = Gaussian::new(vec![0.3], vec![1.5]).unwrap();
    let e = BridgeEndpoints::new(vec![1.0], vec![-0.5], 2.0).unwrap();
    let (m, v) = ou_bridge_marginal(1.5, 0.3, 1.0, -0.5, 2.0, 1.0);
    let mut r = rng(17);
    let xs: Vec<f64> = (0..N)
        .map(|_| sample_ou_bridge_at_times(&e, &g, &[0.4, 1.0], &mut r).unwrap().value(2)[0])
        .collect();
    assert!(ks_one_sample(&xs, normal_cdf(m, v)).unwrap().passes(0.01));
}

#[test]
fn layered_ou_bridge_marginal() {
    let g = Gaussian::new(vec![0.3], vec![1.5]).unwrap();
    let e = BridgeEndpoints::new(vec![1.0], vec![-0.5], 2.0).unwrap();
    let (m, v) = ou_bridge_marginal(1.5, 0.3, 1.0, -0.5, 2.0, 1.0);
    let mut r = rng(18);
    let mut tally = WorkTally::default();
    let xs: Vec<f64> = (0..N)
        .map(|_| {
            let sk = sample_ou_bridge_skeleton(&e, &g, LayerSchedule::default(), &[1.0], &mut r, &mut tally)
                .unwrap();
            let rect = sk.layer_rect().unwrap()[0];
            let x = sk.value_at(1.0).unwrap()[0];
            assert!(rect.contains(x));
            x
        })
        .collect();
    assert!(ks_one_sample(&xs, normal_cdf(m, v)).unwrap().passes(0.01));
}

#[test]
fn ou_bridge_with_vanishing_precision_is_brownian() {
    let g = Gaussian::new(vec![0.0], vec![1e-9]).unwrap();
    let e = BridgeEndpoints::new(vec![0.0], vec![1.0], 1.0).unwrap();
    let mut r = rng(19);
    let mut tally = WorkTally::default();
    let xs: Vec<f64> = (0..20_000)
        .map(|_| {
            sample_ou_bridge_skeleton(&e, &g, LayerSchedule::default(), &[0.5], &mut r, &mut tally)
                .unwrap()
                .value_at(0.5)
                .unwrap()[0]
        })
        .collect();
    // every proposal accepted on the first try
    assert_eq!(tally.layers_drawn, 20_000);
    assert!(ks_one_sample(&xs, normal_cdf(0.5, 0.25)).unwrap().passes(0.01));
}
