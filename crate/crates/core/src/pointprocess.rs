//! Stochastic birth–death process driven by a space-time creation rate.
//!
//! Births form an inhomogeneous Poisson process on `region × [0, t_end]`,
//! generated by thinning a homogeneous process at a bounding rate. Each
//! particle stays where it was born and dies after an independent
//! exponential lifetime of mean `τ`. Deaths past `t_end` are not logged; those
//! particles are alive at `t_end`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::drive::Intensity;
use crate::error::{Error, Result};
use crate::grid::{Bins, Region};
use crate::kinetics::KineticParams;

/// Algorithm identity of the random stream: `ChaCha8Rng::seed_from_u64`
/// from `rand_chacha` (8-round ChaCha, 64-bit seed expanded by PCG32).
pub const GENERATOR: &str = "chacha8-seed_from_u64";

/// Safety factor applied to the scanned maximum when the bound is automatic.
pub const AUTO_BOUND_FACTOR: f64 = 1.5;

const AUTO_SCAN_POINTS: usize = 129;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Birth,
    Death,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirthDeathEvent {
    pub kind: EventKind,
    pub id: u64,
    pub position: f64,
    pub time: f64,
}

/// One particle reconstructed from the log. `death` is `None` when the
/// particle outlives the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub id: u64,
    pub position: f64,
    pub birth: f64,
    pub death: Option<f64>,
}

impl Particle {
    pub fn is_alive(&self, t: f64) -> bool {
        self.birth <= t && self.death.is_none_or(|d| t < d)
    }
}

/// How the thinning bound `R_max` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RateBound {
    /// Scan a 129 × 129 space-time grid and multiply the maximum by 1.5.
    #[default]
    Auto,
    Given(f64),
    /// Use the rate's own [`Intensity::supremum`].
    Analytic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub generator: String,
    pub seed: u64,
    pub region: Region,
    pub t_end: f64,
    pub params: KineticParams,
    pub rate_bound: f64,
    pub events: Vec<BirthDeathEvent>,
}

impl EventLog {
    pub fn births(&self) -> impl Iterator<Item = &BirthDeathEvent> + '_ {
        self.events.iter().filter(|e| e.kind == EventKind::Birth)
    }

    pub fn birth_count(&self) -> usize {
        self.births().count()
    }

    /// Particles indexed by id.
    pub fn particles(&self) -> Vec<Particle> {
        let mut out: Vec<Particle> = Vec::with_capacity(self.events.len());
        for e in &self.events {
            match e.kind {
                EventKind::Birth => out.push(Particle {
                    id: e.id,
                    position: e.position,
                    birth: e.time,
                    death: None,
                }),
                EventKind::Death => {}
            }
        }
        out.sort_by_key(|p| p.id);
        for e in self.events.iter().filter(|e| e.kind == EventKind::Death) {
            out[e.id as usize].death = Some(e.time);
        }
        out
    }

    /// Checks ordering, id density, and birth/death pairing.
    pub fn validate(&self) -> Result<()> {
        let mut births: Vec<Option<(f64, f64)>> = Vec::new();
        let mut died: Vec<bool> = Vec::new();
        let mut prev = f64::NEG_INFINITY;
        for e in &self.events {
            if !(e.time >= prev && e.time >= 0.0 && e.time <= self.t_end) {
                return Err(Error::Accounting(format!("event {e:?} out of order or outside [0, t_end]")));
            }
            prev = e.time;
            let id = e.id as usize;
            match e.kind {
                EventKind::Birth => {
                    if id != births.len() {
                        return Err(Error::Accounting(format!("birth ids not dense: got {id}, expected {}", births.len())));
                    }
                    if !self.region.contains(e.position) {
                        return Err(Error::Accounting(format!("birth {id} at {} outside the region", e.position)));
                    }
                    births.push(Some((e.position, e.time)));
                    died.push(false);
                }
                EventKind::Death => match births.get(id).copied().flatten() {
                    Some((pos, born)) if pos == e.position && e.time > born && !died[id] => died[id] = true,
                    _ => return Err(Error::Accounting(format!("death of particle {id} does not match its birth"))),
                },
            }
        }
        Ok(())
    }
}

/// Alive particles per bin at each sampled time, stored row-major as
/// `times × bins`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyField {
    pub bins: Bins,
    pub times: Vec<f64>,
    pub counts: Vec<u64>,
}

impl OccupancyField {
    pub fn row(&self, time_index: usize) -> &[u64] {
        let n = self.bins.len();
        &self.counts[time_index * n..(time_index + 1) * n]
    }

    pub fn total(&self, time_index: usize) -> u64 {
        self.row(time_index).iter().sum()
    }
}

fn checked_rate(value: f64, bound: f64, t: f64, r: f64) -> Result<f64> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::domain(format!("creation rate at (t = {t}, r = {r}) is {value}")));
    }
    if value > bound {
        return Err(Error::RateBound { rate: value, bound, t, r });
    }
    Ok(value)
}

/// Resolves a [`RateBound`] to a number. The automatic scan checks every
/// scanned value for finiteness and sign.
pub fn resolve_bound<I: Intensity + ?Sized>(rate: &I, region: Region, t_end: f64, bound: RateBound) -> Result<f64> {
    let value = match bound {
        RateBound::Given(b) => b,
        RateBound::Analytic => rate
            .supremum()
            .ok_or_else(|| Error::Precondition("rate has no analytic supremum; give a bound or use auto".into()))?,
        RateBound::Auto => {
            let n = AUTO_SCAN_POINTS;
            let mut max: f64 = 0.0;
            for i in 0..n {
                let t = t_end * i as f64 / (n - 1) as f64;
                for j in 0..n {
                    let r = region.lo + region.length() * j as f64 / (n - 1) as f64;
                    max = max.max(checked_rate(rate.value(t, r), f64::INFINITY, t, r)?);
                }
            }
            AUTO_BOUND_FACTOR * max
        }
    };
    if !(value.is_finite() && value >= 0.0) {
        return Err(Error::domain(format!("rate bound must be finite and non-negative, got {value}")));
    }
    Ok(value)
}

fn exponential(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    let u: f64 = rng.random();
    -(-u).ln_1p() * mean
}

/// Samples the birth–death process. `rate` is the creation rate `ν₊(t, r)`
/// per unit length and time (already multiplied by the creation
/// coefficient). Draw order per candidate: gap, position, acceptance, then a
/// lifetime if accepted.
pub fn simulate<I: Intensity + ?Sized>(
    params: &KineticParams,
    rate: &I,
    region: Region,
    t_end: f64,
    seed: u64,
    bound: RateBound,
) -> Result<EventLog> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::domain(format!("t_end must be positive, got {t_end}")));
    }
    let region = Region::new(region.lo, region.hi)?;
    let r_max = resolve_bound(rate, region, t_end, bound)?;
    let tau = params.tau();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events = Vec::new();
    let mut deaths = Vec::new();

    if r_max > 0.0 {
        let candidate_mean_gap = 1.0 / (r_max * region.length());
        let mut t = 0.0;
        let mut id = 0u64;
        loop {
            t += exponential(&mut rng, candidate_mean_gap);
            if t >= t_end {
                break;
            }
            let u: f64 = rng.random();
            let r = (region.lo + u * region.length()).min(region.hi);
            let value = checked_rate(rate.value(t, r), r_max, t, r)?;
            let accept: f64 = rng.random();
            if accept * r_max < value {
                let death = t + exponential(&mut rng, tau);
                events.push(BirthDeathEvent {
                    kind: EventKind::Birth,
                    id,
                    position: r,
                    time: t,
                });
                if death <= t_end && death > t {
                    deaths.push(BirthDeathEvent {
                        kind: EventKind::Death,
                        id,
                        position: r,
                        time: death,
                    });
                }
                id += 1;
            }
        }
    }

    events.extend(deaths);
    events.sort_by(|a, b| {
        a.time
            .total_cmp(&b.time)
            .then_with(|| (a.kind == EventKind::Death).cmp(&(b.kind == EventKind::Death)))
            .then_with(|| a.id.cmp(&b.id))
    });
    Ok(EventLog {
        generator: GENERATOR.to_string(),
        seed,
        region,
        t_end,
        params: *params,
        rate_bound: r_max,
        events,
    })
}

fn check_time(log: &EventLog, t: f64) -> Result<()> {
    if !(t >= 0.0 && t <= log.t_end) {
        return Err(Error::domain(format!("time {t} outside [0, {}]", log.t_end)));
    }
    Ok(())
}

/// Number of particles with `birth ≤ t < death`.
pub fn population_at(log: &EventLog, t: f64) -> Result<u64> {
    check_time(log, t)?;
    let upto = log.events.partition_point(|e| e.time <= t);
    let births = log.events[..upto].iter().filter(|e| e.kind == EventKind::Birth).count();
    Ok((births - (upto - births)) as u64)
}

fn check_bins(log: &EventLog, bins: &Bins) -> Result<()> {
    if !bins.covers(log.region) {
        return Err(Error::domain(format!(
            "bins [{}, {}] do not cover the region [{}, {}]",
            bins.lo(),
            bins.hi(),
            log.region.lo,
            log.region.hi
        )));
    }
    Ok(())
}

/// Alive counts per bin at each of `times` (strictly increasing, within
/// `[0, t_end]`).
pub fn occupancy(log: &EventLog, bins: &Bins, times: &[f64]) -> Result<OccupancyField> {
    check_bins(log, bins)?;
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("occupancy times must be strictly increasing"));
    }
    for &t in times {
        check_time(log, t)?;
    }
    let nb = bins.len();
    // difference array over time indices, one column per bin
    let mut delta = vec![0i64; (times.len() + 1) * nb];
    for e in &log.events {
        let bin = bins
            .locate(e.position)
            .ok_or_else(|| Error::Accounting(format!("event at {} outside the bins", e.position)))?;
        let first = times.partition_point(|&s| s < e.time);
        delta[first * nb + bin] += match e.kind {
            EventKind::Birth => 1,
            EventKind::Death => -1,
        };
    }
    let mut counts = vec![0u64; times.len() * nb];
    let mut running = vec![0i64; nb];
    for i in 0..times.len() {
        for b in 0..nb {
            running[b] += delta[i * nb + b];
            counts[i * nb + b] = running[b] as u64;
        }
    }
    Ok(OccupancyField {
        bins: bins.clone(),
        times: times.to_vec(),
        counts,
    })
}

fn overlap(p: &Particle, start: f64, end: f64, t_end: f64) -> f64 {
    let death = p.death.unwrap_or(t_end);
    (death.min(end) - p.birth.max(start)).max(0.0)
}

/// Exact time average of the alive count over `[start, end]`.
pub fn time_averaged_population(log: &EventLog, start: f64, end: f64) -> Result<f64> {
    check_time(log, start)?;
    check_time(log, end)?;
    if end <= start {
        return Err(Error::domain("averaging window must have positive length"));
    }
    let total: f64 = log.particles().iter().map(|p| overlap(p, start, end, log.t_end)).sum();
    Ok(total / (end - start))
}

/// Exact time average of the alive count per bin over `[start, end]`.
pub fn time_averaged_occupancy(log: &EventLog, bins: &Bins, start: f64, end: f64) -> Result<Vec<f64>> {
    check_bins(log, bins)?;
    check_time(log, start)?;
    check_time(log, end)?;
    if end <= start {
        return Err(Error::domain("averaging window must have positive length"));
    }
    let mut sums = vec![0.0; bins.len()];
    for p in log.particles() {
        let bin = bins
            .locate(p.position)
            .ok_or_else(|| Error::Accounting(format!("particle at {} outside the bins", p.position)))?;
        sums[bin] += overlap(&p, start, end, log.t_end);
    }
    let w = end - start;
    Ok(sums.into_iter().map(|s| s / w).collect())
}

/// Variance of the time-averaged occupancy of a stationary M/G/∞ count with
/// mean `mean` and exponential lifetimes of mean `tau`, averaged over a
/// window of length `window`.
pub fn time_averaged_variance(mean: f64, tau: f64, window: f64) -> f64 {
    let x = window / tau;
    // 1 − (1 − e^{−x})/x, by series where the closed form cancels
    let shape = if x < 1e-3 {
        x / 2.0 - x * x / 6.0 + x * x * x / 24.0
    } else {
        1.0 + (-x).exp_m1() / x
    };
    2.0 * mean / x * shape
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::Calibration;

    fn params() -> KineticParams {
        KineticParams::matter(1.0, Calibration::Tau(1.0)).unwrap()
    }

    fn region() -> Region {
        Region::new(0.0, 2.0).unwrap()
    }

    #[test]
    fn zero_rate_gives_empty_log() {
        let zero = |_t: f64, _r: f64| 0.0;
        let log = simulate(&params(), &zero, region(), 10.0, 1, RateBound::Auto).unwrap();
        assert!(log.events.is_empty());
        assert_eq!(population_at(&log, 5.0).unwrap(), 0);
    }

    #[test]
    fn same_seed_same_log() {
        let rate = |t: f64, r: f64| 5.0 + (t + r).sin();
        let a = simulate(&params(), &rate, region(), 20.0, 9, RateBound::Given(7.0)).unwrap();
        let b = simulate(&params(), &rate, region(), 20.0, 9, RateBound::Given(7.0)).unwrap();
        let c = simulate(&params(), &rate, region(), 20.0, 10, RateBound::Given(7.0)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.events, c.events);
        a.validate().unwrap();
        assert_eq!(a.generator, GENERATOR);
    }

    #[test]
    fn bound_violation_is_fatal() {
        let rate = |_t: f64, r: f64| 1.0 + r;
        let err = simulate(&params(), &rate, region(), 50.0, 3, RateBound::Given(2.0)).unwrap_err();
        assert!(matches!(err, Error::RateBound { .. }));
        let nan = |_t: f64, _r: f64| f64::NAN;
        assert!(matches!(
            simulate(&params(), &nan, region(), 5.0, 3, RateBound::Given(1.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            simulate(&params(), &rate, region(), 5.0, 3, RateBound::Analytic),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn population_counts_alive_particles() {
        let rate = |_t: f64, _r: f64| 3.0;
        let log = simulate(&params(), &rate, region(), 10.0, 5, RateBound::Given(3.0)).unwrap();
        assert_eq!(population_at(&log, 0.0).unwrap(), 0);
        let first = log.events[0];
        assert_eq!(first.kind, EventKind::Birth);
        assert_eq!(population_at(&log, first.time).unwrap(), 1);
        let particles = log.particles();
        for &t in &[0.5, 3.3, 9.99, 10.0] {
            let brute = particles.iter().filter(|p| p.is_alive(t)).count() as u64;
            assert_eq!(population_at(&log, t).unwrap(), brute);
        }
        assert!(population_at(&log, 10.5).is_err());
        assert!(population_at(&log, -0.1).is_err());
    }

    #[test]
    fn occupancy_sums_match_population() {
        let rate = |t: f64, r: f64| 2.0 + (3.0 * r + t).cos();
        let log = simulate(&params(), &rate, region(), 15.0, 11, RateBound::Auto).unwrap();
        let bins = Bins::uniform(region(), 8).unwrap();
        let times: Vec<f64> = (0..=30).map(|i| 0.5 * i as f64).collect();
        let occ = occupancy(&log, &bins, &times).unwrap();
        for (i, &t) in times.iter().enumerate() {
            assert_eq!(occ.total(i), population_at(&log, t).unwrap());
        }
        let narrow = Bins::uniform(Region::new(0.0, 1.0).unwrap(), 4).unwrap();
        assert!(occupancy(&log, &narrow, &times).is_err());
    }

    #[test]
    fn single_particle_occupancy() {
        let log = EventLog {
            generator: GENERATOR.into(),
            seed: 0,
            region: region(),
            t_end: 4.0,
            params: params(),
            rate_bound: 1.0,
            events: vec![
                BirthDeathEvent {
                    kind: EventKind::Birth,
                    id: 0,
                    position: 0.9,
                    time: 1.0,
                },
                BirthDeathEvent {
                    kind: EventKind::Death,
                    id: 0,
                    position: 0.9,
                    time: 2.5,
                },
            ],
        };
        log.validate().unwrap();
        let bins = Bins::uniform(region(), 5).unwrap();
        let occ = occupancy(&log, &bins, &[0.5, 1.0, 2.0, 2.5, 3.0]).unwrap();
        assert_eq!(occ.row(0), &[0, 0, 0, 0, 0]);
        assert_eq!(occ.row(1), &[0, 0, 1, 0, 0]);
        assert_eq!(occ.row(2), &[0, 0, 1, 0, 0]);
        assert_eq!(occ.row(3), &[0, 0, 0, 0, 0]);
        let avg = time_averaged_occupancy(&log, &bins, 0.0, 4.0).unwrap();
        assert_eq!(avg[2], 1.5 / 4.0);
        assert_eq!(time_averaged_population(&log, 2.0, 4.0).unwrap(), 0.25);
    }

    #[test]
    fn particles_never_move() {
        let rate = |_t: f64, r: f64| 1.0 + r;
        let log = simulate(&params(), &rate, region(), 30.0, 2, RateBound::Given(3.0)).unwrap();
        let particles = log.particles();
        for e in &log.events {
            assert_eq!(particles[e.id as usize].position, e.position);
        }
        log.validate().unwrap();
    }

    #[test]
    fn time_average_variance_limits() {
        // short window: the average is a single snapshot, variance = mean
        assert!((time_averaged_variance(10.0, 1.0, 1e-6) - 10.0).abs() < 1e-4);
        // long window: 2·mean·τ/W
        let v = time_averaged_variance(10.0, 1.0, 1e6);
        assert!((v - 2.0 * 10.0 / 1e6).abs() < 1e-10);
    }
}
