use std::collections::HashMap;

use wavekin::estimators::{ks_critical_value, ks_statistic};
use wavekin::pointprocess::time_averaged_population;
use wavekin::{
    birth_histogram, chi_square_test, integrate_kinetics, occupancy, population_at, reference_distribution,
    simulate, Bins, Calibration, EventKind, Grid, KineticParams, RateBound, Region,
};

fn params(tau: f64) -> KineticParams {
    KineticParams::matter(1.0, Calibration::Tau(tau)).unwrap()
}

#[test]
fn same_seed_same_log_different_seed_different_log() {
    let p = params(1.0);
    let region = Region::new(0.0, 2.0).unwrap();
    let rate = |t: f64, r: f64| 30.0 * (1.0 + (t + r).sin().powi(2));
    let a = simulate(&p, &rate, region, 10.0, 9, RateBound::Auto).unwrap();
    let b = simulate(&p, &rate, region, 10.0, 9, RateBound::Auto).unwrap();
    let c = simulate(&p, &rate, region, 10.0, 10, RateBound::Auto).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.events, c.events);
    a.validate().unwrap();
}

#[test]
fn constant_rate_counts_and_lifetimes() {
    let tau = 1.0;
    let (nu, length, t_end) = (500.0, 4.0, 50.0 * tau);
    let region = Region::new(0.0, length).unwrap();
    let log = simulate(&params(tau), &|_t: f64, _r: f64| nu, region, t_end, 77, RateBound::Given(nu)).unwrap();

    // birth count ~ Poisson(ν V t_end)
    let expected = nu * length * t_end;
    let births = log.birth_count() as f64;
    assert!((births - expected).abs() <= 4.0 * expected.sqrt(), "births {births} vs {expected}");

    // lifetimes of particles that died are Exp(τ) truncated at t_end − birth;
    // restrict to births early enough that truncation is negligible
    let lifetimes: Vec<f64> = log
        .particles()
        .iter()
        .filter(|p| p.birth < t_end - 30.0 * tau)
        .map(|p| p.death.expect("death before t_end") - p.birth)
        .take(10_000)
        .collect();
    assert_eq!(lifetimes.len(), 10_000);
    let d = ks_statistic(&lifetimes, |x| 1.0 - (-x / tau).exp()).unwrap();
    assert!(d < ks_critical_value(lifetimes.len(), 0.001), "lifetime KS {d}");

    let births: Vec<f64> = log.births().map(|e| e.time).collect();
    let gaps: Vec<f64> = births.windows(2).map(|w| w[1] - w[0]).take(10_000).collect();
    let total = nu * length;
    let d = ks_statistic(&gaps, |x| 1.0 - (-x * total).exp()).unwrap();
    assert!(d < ks_critical_value(gaps.len(), 0.001), "inter-birth KS {d}");

    // steady-state population ~ Poisson(ν V τ) at every instant
    let mean = time_averaged_population(&log, 10.0 * tau, t_end).unwrap();
    let want = nu * length * tau;
    let var = wavekin::pointprocess::time_averaged_variance(want, tau, t_end - 10.0 * tau);
    assert!((mean - want).abs() <= 4.0 * var.sqrt(), "population {mean} vs {want}");
}

#[test]
fn spatial_profile_passes_chi_square() {
    let region = Region::new(0.0, 3.0).unwrap();
    let k = 2.0;
    let rate = move |_t: f64, r: f64| 4000.0 * (k * r).sin().powi(2);
    let log = simulate(&params(1.0), &rate, region, 10.0, 5, RateBound::Given(4000.0)).unwrap();
    let bins = Bins::uniform(region, 40).unwrap();
    let hist = birth_histogram(&log, &bins).unwrap();
    assert_eq!(hist.total() as usize, log.birth_count());
    let reference = reference_distribution(|r| (k * r).sin().powi(2), &bins).unwrap();
    let chi = chi_square_test(&hist, &reference).unwrap();
    assert!(chi.p_value >= 0.001, "{chi:?}");
}

#[test]
fn particles_never_move_and_die_once() {
    let region = Region::new(-1.0, 1.0).unwrap();
    let log = simulate(&params(0.5), &|_t: f64, r: f64| 100.0 * (1.0 + r * r), region, 6.0, 3, RateBound::Auto).unwrap();
    let mut born: HashMap<u64, (f64, f64)> = HashMap::new();
    let mut dead = 0;
    for e in &log.events {
        match e.kind {
            EventKind::Birth => {
                assert!(born.insert(e.id, (e.position, e.time)).is_none());
                assert!(region.contains(e.position));
            }
            EventKind::Death => {
                let (pos, t) = born[&e.id];
                assert_eq!(pos, e.position);
                assert!(e.time > t && e.time <= log.t_end);
                dead += 1;
            }
        }
    }
    assert!(log.events.windows(2).all(|w| w[0].time <= w[1].time));
    assert_eq!(population_at(&log, log.t_end).unwrap() as usize, born.len() - dead);
}

#[test]
fn occupancy_matches_mean_field_density() {
    // at fixed t the population in a bin is Poisson with mean ∫ p(t, r) dr
    let tau = 1.0;
    let p = params(tau);
    let region = Region::new(0.0, 2.0).unwrap();
    let intensity = |t: f64, r: f64| 300.0 * (1.0 + 0.5 * t.cos()) * (1.0 + (3.0 * r).sin().powi(2));
    let bins = Bins::uniform(region, 4).unwrap();
    let times = [2.0, 4.0, 6.0];
    let seeds = 40u64;
    let mut sums = vec![0.0; times.len() * bins.len()];
    for seed in 0..seeds {
        let log = simulate(&p, &intensity, region, 6.0, seed, RateBound::Given(300.0 * 1.5 * 2.0)).unwrap();
        let occ = occupancy(&log, &bins, &times).unwrap();
        for (i, _) in times.iter().enumerate() {
            for (j, c) in occ.row(i).iter().enumerate() {
                sums[i * bins.len() + j] += *c as f64;
            }
        }
    }
    let grid = Grid::uniform(0.0, 2.0, 801).unwrap();
    let series = integrate_kinetics(&p, &intensity, &vec![0.0; 801], &grid, 6.0, 0.01).unwrap();
    for (i, &t) in times.iter().enumerate() {
        let row = series.times().iter().position(|&s| (s - t).abs() < 1e-9).unwrap();
        for j in 0..bins.len() {
            let (lo, hi) = bins.bounds(j);
            // trapezoid over the fine grid inside the bin
            let pts: Vec<(f64, f64)> = grid
                .points()
                .iter()
                .zip(series.row(row))
                .filter(|(r, _)| **r >= lo - 1e-12 && **r <= hi + 1e-12)
                .map(|(r, v)| (*r, *v))
                .collect();
            let mass: f64 = pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
            let expected = mass * seeds as f64;
            let observed = sums[i * bins.len() + j];
            assert!(
                (observed - expected).abs() <= 4.0 * expected.sqrt(),
                "t {t} bin {j}: {observed} vs {expected}"
            );
        }
    }
}
