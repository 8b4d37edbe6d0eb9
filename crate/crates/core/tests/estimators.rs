use proptest::prelude::*;
use wavekin::estimators::{dominant_period, harmonic_fit, ks_critical_value};
use wavekin::{
    born_deviation, chi_square_test, integrate_kinetics_recorded, l1_distance, poisson_band, visibility,
    BinnedDistribution, Bins, Calibration, Grid, Intensity, KineticParams, Region, Sinusoid,
};

fn bins(n: usize) -> Bins {
    Bins::uniform(Region::new(0.0, 1.0).unwrap(), n).unwrap()
}

fn dist(weights: Vec<f64>) -> BinnedDistribution {
    BinnedDistribution::new(bins(weights.len()), weights).unwrap()
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..10.0, n).prop_filter("non-zero mass", |w| w.iter().sum::<f64>() > 1e-3)
}

proptest! {
    #[test]
    fn l1_is_a_metric((a, b, c) in (weights(12), weights(12), weights(12))) {
        let (a, b, c) = (dist(a), dist(b), dist(c));
        let ab = l1_distance(&a, &b).unwrap();
        prop_assert!((ab - l1_distance(&b, &a).unwrap()).abs() <= 1e-12);
        prop_assert!(l1_distance(&a, &a).unwrap() <= 1e-12);
        prop_assert!(ab <= l1_distance(&a, &c).unwrap() + l1_distance(&c, &b).unwrap() + 1e-12);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&ab));
    }

    #[test]
    fn l1_ignores_overall_scale(w in weights(8), k in 1e-3f64..1e3) {
        let scaled: Vec<f64> = w.iter().map(|x| x * k).collect();
        prop_assert!(l1_distance(&dist(w), &dist(scaled)).unwrap() <= 1e-12);
    }

    #[test]
    fn visibility_is_scale_invariant(w in weights(20), k in 1e-3f64..1e3) {
        let scaled: Vec<f64> = w.iter().map(|x| x * k).collect();
        let (v, vs) = (visibility(&w).unwrap(), visibility(&scaled).unwrap());
        prop_assert!((v - vs).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn poisson_band_is_centered(expected in 0.0f64..1e6, nsigma in 0.5f64..6.0) {
        let band = poisson_band(expected, nsigma);
        let half = nsigma * expected.sqrt();
        prop_assert!((band.hi - (expected + half)).abs() <= 1e-9 * (1.0 + expected));
        prop_assert!((band.lo - (expected - half).max(0.0)).abs() <= 1e-9 * (1.0 + expected));
        prop_assert!(band.contains(expected));
    }
}

#[test]
fn band_examples() {
    let b = poisson_band(100.0, 3.0);
    assert_eq!((b.lo, b.hi), (70.0, 130.0));
    let b = poisson_band(25.0, 4.0);
    assert_eq!((b.lo, b.hi), (5.0, 45.0));
    let b = poisson_band(0.0, 4.0);
    assert_eq!((b.lo, b.hi), (0.0, 0.0));
}

#[test]
fn visibility_examples() {
    assert_eq!(visibility(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
    assert_eq!(visibility(&[0.0, 2.0, 0.0]).unwrap(), 1.0);
    assert!((visibility(&[1.0, 3.0]).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn ks_critical_matches_asymptotic_formula() {
    // √(−½ ln(α/2)) / √n
    let want = (-0.5 * (0.0005f64).ln()).sqrt() / 100.0;
    assert!((ks_critical_value(10_000, 0.001) - want).abs() < 1e-12);
}

#[test]
fn chi_square_of_exact_counts_passes() {
    let reference = dist(vec![1.0, 2.0, 3.0, 4.0]).normalized().unwrap();
    let observed = dist(vec![100.0, 200.0, 300.0, 400.0]);
    let chi = chi_square_test(&observed, &reference).unwrap();
    assert!(chi.statistic.abs() < 1e-12);
    assert!(chi.p_value > 0.999);
    let skewed = dist(vec![400.0, 300.0, 200.0, 100.0]);
    assert!(chi_square_test(&skewed, &reference).unwrap().p_value < 1e-10);
}

#[test]
fn recovers_period_and_harmonic() {
    let xs: Vec<f64> = (0..400).map(|i| i as f64 * 0.01).collect();
    let ys: Vec<f64> = xs.iter().map(|x| (std::f64::consts::PI * x / 0.37).sin().powi(2)).collect();
    assert!((dominant_period(&xs, &ys).unwrap() - 0.37).abs() < 1e-4);

    let ts: Vec<f64> = (0..1000).map(|i| i as f64 * 0.013).collect();
    let vs: Vec<f64> = ts.iter().map(|t| 2.0 + 0.7 * (3.0 * t - 0.4).cos()).collect();
    let fit = harmonic_fit(&ts, &vs, 3.0).unwrap();
    assert!((fit.mean - 2.0).abs() < 1e-12 && (fit.amplitude - 0.7).abs() < 1e-12 && (fit.phase - 0.4).abs() < 1e-12);
}

/// Steady-state deviation of a first-order lag driven by `1 + cos(Ωt)` from
/// `g·I`, relative to the reference maximum `2g`: `x / (2√(1 + x²))`.
fn sinusoid_deviation(x: f64) -> f64 {
    x / (2.0 * x.hypot(1.0))
}

fn deviation_for_period(period_over_tau: f64) -> f64 {
    let tau = 1.0;
    let params = KineticParams::matter(1.0, Calibration::Tau(tau)).unwrap();
    let omega = 2.0 * std::f64::consts::PI / (period_over_tau * tau);
    let drive = Sinusoid {
        mean: 1.0,
        amplitude: 1.0,
        angular_frequency: omega,
    };
    let grid = Grid::uniform(0.0, 1.0, 2).unwrap();
    let dt = (period_over_tau * tau / 2000.0).min(tau / 20.0);
    let t_end = 25.0 * tau + 2.0 * period_over_tau * tau;
    let series = integrate_kinetics_recorded(&params, &drive, &[0.0; 2], &grid, t_end, dt, 1).unwrap();
    let gain = params.equilibrium_gain();
    let dev = born_deviation(&series, |r, t| Ok(gain * drive.value(t, r)), 25.0 * tau).unwrap();
    let expected = sinusoid_deviation(omega * tau);
    assert!(
        (dev.sup - expected).abs() <= 1e-4 * expected.max(1e-3),
        "T/τ = {period_over_tau}: {} vs {expected}",
        dev.sup
    );
    dev.sup
}

#[test]
fn born_deviation_shrinks_as_variation_slows() {
    let devs: Vec<f64> = [1.0, 10.0, 100.0].iter().map(|&p| deviation_for_period(p)).collect();
    assert!(devs[0] > devs[1] && devs[1] > devs[2], "{devs:?}");
}

#[test]
fn born_deviation_rejects_zero_reference() {
    let params = KineticParams::matter(1.0, Calibration::Tau(1.0)).unwrap();
    let grid = Grid::uniform(0.0, 1.0, 2).unwrap();
    let series = integrate_kinetics_recorded(&params, &|_t: f64, _r: f64| 1.0, &[0.0; 2], &grid, 1.0, 0.05, 1).unwrap();
    assert!(born_deviation(&series, |_r, _t| Ok(0.0), 0.0).is_err());
}
