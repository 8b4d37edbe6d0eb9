//! Built-in experiment presets and the pipeline that runs them.
//!
//! A [`Scenario`] wires a drive (analytic field or synthetic intensity) into
//! the deterministic kinetics and the stochastic sampler, then computes the
//! statistics named in its thresholds. Physical inputs are dimensionless;
//! `τ` sets the unit of time.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::drive::{Drive, Intensity, Scaled, Sinusoid, SquareWave};
use crate::error::{Error, Result, StageExt};
use crate::estimators::{
    bin_integrals, birth_histogram, birth_histogram_first, born_deviation, chi_square_test, dominant_period,
    harmonic_fit, ks_critical_value, ks_statistic, l1_distance, visibility, BinnedDistribution,
};
use crate::grid::{Bins, Grid, Region};
use crate::io::{self, Profile};
use crate::kinetics::{born_limit_density, integrate_kinetics_recorded, Calibration, DensitySeries, KineticParams, Mode};
use crate::pointprocess::{simulate, time_averaged_occupancy, time_averaged_population, time_averaged_variance, EventLog, RateBound};
use crate::quadrature::{self, Tolerance};
use crate::wavefield::{fringe_spacing, instantaneous_intensity, mean_intensity, FieldSpec, Polarization, TimeWindow};

/// Significance level shared by the χ² and KS checks.
pub const SIGNIFICANCE: f64 = 0.001;

/// Width of the Poisson acceptance bands, in standard deviations.
pub const NSIGMA: f64 = 4.0;

/// Minimum run length, in units of `τ`, for steady-state scenarios.
pub const MIN_STEADY_RUN: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    /// `p(0) = 0`.
    #[default]
    Empty,
    /// `p(0)` equal to the Born density at `t = 0`.
    Born,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Threshold {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

impl Threshold {
    pub fn at_least(min: f64) -> Self {
        Self { min: Some(min), max: None }
    }

    pub fn at_most(max: f64) -> Self {
        Self { min: None, max: Some(max) }
    }

    pub fn admits(&self, value: f64) -> bool {
        !value.is_nan() && self.min.is_none_or(|m| value >= m) && self.max.is_none_or(|m| value <= m)
    }
}

fn default_one() -> f64 {
    1.0
}

fn default_one_usize() -> usize {
    1
}

fn default_transient() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub params: KineticParams,
    pub drive: Drive,
    pub region: Region,
    /// Density grid points, uniform over the region, endpoints included.
    pub grid_points: usize,
    /// Histogram bins, uniform over the region.
    pub bins: usize,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "default_one_usize")]
    pub record_every: usize,
    pub seed: u64,
    /// Number of independent copies of the system feeding the sampler.
    #[serde(default = "default_one")]
    pub ensemble: f64,
    /// Thinning bound; the drive's analytic supremum when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_bound: Option<f64>,
    #[serde(default)]
    pub initial: InitialState,
    /// Samples earlier than this many `τ` are ignored by the Born comparison.
    #[serde(default = "default_transient")]
    pub born_transient: f64,
    #[serde(default)]
    pub steady_state: bool,
    /// Rerun the kinetics with `τ` multiplied by this factor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub companion_tau_factor: Option<f64>,
    /// Averaging window `[start, end]` in units of `τ` for occupancy checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupancy_window: Option<[f64; 2]>,
    /// Number of lifetimes and inter-birth gaps used by the KS checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_samples: Option<usize>,
    /// Extra coarse binning for a low-noise visibility estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse_bins: Option<usize>,
    /// Birth counts at which the histogram is compared with the reference.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checkpoints: Vec<usize>,
    #[serde(default)]
    pub thresholds: BTreeMap<String, Threshold>,
}

impl Scenario {
    pub fn tau(&self) -> f64 {
        self.params.tau()
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::uniform(self.region.lo, self.region.hi, self.grid_points)
    }

    pub fn histogram_bins(&self) -> Result<Bins> {
        Bins::uniform(self.region, self.bins)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidSpec(format!("scenario {}: {msg}", self.name)));
        if self.name.is_empty() {
            return Err(Error::invalid("scenario name is empty"));
        }
        self.drive.validate()?;
        let region = Region::new(self.region.lo, self.region.hi)?;
        if let Some(field) = self.drive.field() {
            let optical = field.is_optical();
            if optical != (self.params.mode() == Mode::Photon) {
                return invalid(format!(
                    "{} field needs {} kinetics",
                    field.kind_name(),
                    if optical { "photon" } else { "matter" }
                ));
            }
            field.check_position(region.lo)?;
            field.check_position(region.hi)?;
        } else if self.initial == InitialState::Born {
            return invalid("a Born initial state needs a field drive".into());
        }
        if self.grid_points < 2 || self.bins == 0 {
            return invalid("need at least two grid points and one bin".into());
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return invalid(format!("t_end must be positive, got {}", self.t_end));
        }
        let max_dt = self.tau() * crate::kinetics::MAX_STEP_FRACTION;
        if !(self.dt > 0.0 && self.dt <= max_dt * (1.0 + 1e-12)) {
            return Err(Error::StepSize { dt: self.dt, max: max_dt });
        }
        if self.record_every == 0 {
            return invalid("record_every must be at least 1".into());
        }
        if !(self.ensemble.is_finite() && self.ensemble > 0.0) {
            return invalid(format!("ensemble must be positive, got {}", self.ensemble));
        }
        if let Some(b) = self.rate_bound {
            if !(b.is_finite() && b >= 0.0) {
                return invalid(format!("rate_bound must be finite and non-negative, got {b}"));
            }
        }
        if !(self.born_transient >= 0.0 && self.born_transient * self.tau() <= self.t_end) {
            return invalid("born_transient must lie within the run".into());
        }
        if self.steady_state && self.t_end < MIN_STEADY_RUN * self.tau() * (1.0 - 1e-12) {
            return invalid(format!("steady-state runs need t_end ≥ {MIN_STEADY_RUN}τ"));
        }
        if let Some(f) = self.companion_tau_factor {
            if !(f.is_finite() && f > 0.0) {
                return invalid("companion_tau_factor must be positive".into());
            }
        }
        if let Some([a, b]) = self.occupancy_window {
            if !(a >= 0.0 && b > a && b * self.tau() <= self.t_end * (1.0 + 1e-12)) {
                return invalid("occupancy_window must satisfy 0 ≤ start < end ≤ t_end/τ".into());
            }
        }
        if self.ks_samples == Some(0) || self.coarse_bins == Some(0) {
            return invalid("ks_samples and coarse_bins must be positive".into());
        }
        if self.checkpoints.windows(2).any(|w| w[1] <= w[0]) || self.checkpoints.first() == Some(&0) {
            return invalid("checkpoints must be positive and strictly increasing".into());
        }
        for (name, t) in &self.thresholds {
            if let (Some(lo), Some(hi)) = (t.min, t.max) {
                if lo > hi {
                    return invalid(format!("threshold {name} has min > max"));
                }
            }
            if t.min.is_none() && t.max.is_none() {
                return invalid(format!("threshold {name} sets neither min nor max"));
            }
        }
        Ok(())
    }
}

/// Recorded result of one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultBundle {
    pub scenario: Scenario,
    pub series: DensitySeries,
    pub log: EventLog,
    pub histogram: BinnedDistribution,
    pub reference: BinnedDistribution,
    pub profile: Profile,
    pub statistics: BTreeMap<String, f64>,
    pub outcomes: BTreeMap<String, Outcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventManifest {
    pub file: String,
    pub seed: u64,
    pub generator: String,
    pub births: usize,
    pub events: usize,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub description: String,
    pub passed: bool,
    pub statistics: BTreeMap<String, f64>,
    pub thresholds: BTreeMap<String, Outcome>,
    pub events: EventManifest,
    pub files: BTreeMap<String, String>,
    pub config: Scenario,
}

impl ResultBundle {
    pub fn passed(&self) -> bool {
        self.outcomes.values().all(|o| o.passed)
    }

    pub fn failures(&self) -> Vec<(&str, &Outcome)> {
        self.outcomes
            .iter()
            .filter(|(_, o)| !o.passed)
            .map(|(k, o)| (k.as_str(), o))
            .collect()
    }

    pub fn summary(&self) -> Summary {
        let files = [
            ("density", io::DENSITY_FILE),
            ("events", io::EVENTS_FILE),
            ("histogram", io::HISTOGRAM_FILE),
            ("profile", io::PROFILE_FILE),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        Summary {
            scenario: self.scenario.name.clone(),
            description: self.scenario.description.clone(),
            passed: self.passed(),
            statistics: self.statistics.clone(),
            thresholds: self.outcomes.clone(),
            events: EventManifest {
                file: io::EVENTS_FILE.to_string(),
                seed: self.log.seed,
                generator: self.log.generator.clone(),
                births: self.log.birth_count(),
                events: self.log.events.len(),
            },
            files,
            config: self.scenario.clone(),
        }
    }

    /// Writes the data files and `summary.json` (last) into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        io::write_atomic(&dir.join(io::DENSITY_FILE), io::density_csv(&self.series).as_bytes())?;
        io::write_atomic(&dir.join(io::EVENTS_FILE), io::events_ndjson(&self.log)?.as_bytes())?;
        io::write_atomic(&dir.join(io::HISTOGRAM_FILE), io::histogram_csv(&self.histogram).as_bytes())?;
        io::write_atomic(&dir.join(io::PROFILE_FILE), io::profile_csv(&self.profile).as_bytes())?;
        let mut summary = serde_json::to_string_pretty(&self.summary())?;
        summary.push('\n');
        io::write_atomic(&dir.join(io::SUMMARY_FILE), summary.as_bytes())?;
        Ok(())
    }
}

/// Time average of the drive intensity at `r` over `[0, t_end]`.
fn run_mean(drive: &Drive, r: f64, t_end: f64) -> Result<f64> {
    match drive {
        Drive::Field { field, scale } => Ok(scale * mean_intensity(field, r, TimeWindow::new(0.0, t_end)?)?),
        other => {
            let est = quadrature::integrate(
                |t| other.value(t, r),
                0.0,
                t_end,
                &other.breakpoints(0.0, t_end),
                1,
                Tolerance::relative(1e-12).with_abs(1e-300),
            )?;
            Ok(est.value / t_end)
        }
    }
}

/// Born-limit density for the given kinetics.
fn born_reference(params: &KineticParams, drive: &Drive, r: f64, t: f64) -> Result<f64> {
    match drive {
        Drive::Field { field, scale } => Ok(scale * born_limit_density(params, field, r, t)?),
        other => Ok(params.equilibrium_gain() * other.value(t, r)),
    }
}

fn kinetics_run(s: &Scenario, params: &KineticParams, grid: &Grid) -> Result<DensitySeries> {
    let p0 = match s.initial {
        InitialState::Empty => vec![0.0; grid.len()],
        InitialState::Born => grid
            .points()
            .iter()
            .map(|&r| born_reference(params, &s.drive, r, 0.0))
            .collect::<Result<_>>()?,
    };
    integrate_kinetics_recorded(params, &s.drive, &p0, grid, s.t_end, s.dt, s.record_every)
}

fn insert(stats: &mut BTreeMap<String, f64>, name: &str, value: f64) {
    stats.insert(name.to_string(), value);
}

/// Runs the full pipeline: kinetics, sampling, then statistics and threshold
/// outcomes. Deterministic for a given scenario.
pub fn run_scenario(s: &Scenario) -> Result<ResultBundle> {
    s.validate().stage("validate")?;
    let params = s.params;
    let tau = params.tau();
    let grid = s.grid()?;
    let bins = s.histogram_bins()?;
    let mut stats = BTreeMap::new();

    // deterministic side
    let series = kinetics_run(s, &params, &grid).stage("kinetics")?;
    let deviation = born_deviation(
        &series,
        |r, t| born_reference(&params, &s.drive, r, t),
        s.born_transient * tau,
    )
    .stage("born deviation")?;
    insert(&mut stats, "born_deviation", deviation.sup);
    insert(&mut stats, "born_deviation_mean", deviation.mean);
    insert(&mut stats, "born_ratio_error", deviation.max_ratio_error);

    if let Some(factor) = s.companion_tau_factor {
        let scaled = params.with_tau(tau * factor).stage("companion")?;
        let companion = kinetics_run(s, &scaled, &grid).stage("companion kinetics")?;
        let dev = born_deviation(
            &companion,
            |r, t| born_reference(&scaled, &s.drive, r, t),
            s.born_transient * scaled.tau(),
        )
        .stage("companion born deviation")?;
        insert(&mut stats, "born_deviation_tau_scaled", dev.sup);
        insert(&mut stats, "born_deviation_tau_scaled_mean", dev.mean);
    }

    if let Drive::Sinusoid(sin) = &s.drive {
        let start = series.times().partition_point(|&t| t < s.born_transient * tau);
        let fit = harmonic_fit(&series.times()[start..], &series.column(0)[start..], sin.angular_frequency)
            .stage("harmonic fit")?;
        let x = sin.angular_frequency * tau;
        let ratio = fit.amplitude / (params.equilibrium_gain() * sin.amplitude.abs());
        let lag = if sin.amplitude >= 0.0 { fit.phase } else { fit.phase - PI };
        let lag = (lag + PI).rem_euclid(2.0 * PI) - PI;
        insert(&mut stats, "amplitude_ratio", ratio);
        insert(&mut stats, "amplitude_ratio_expected", 1.0 / x.hypot(1.0));
        insert(&mut stats, "amplitude_ratio_error", (ratio - 1.0 / x.hypot(1.0)).abs());
        insert(&mut stats, "phase_lag", lag);
        insert(&mut stats, "phase_lag_expected", x.atan());
        insert(&mut stats, "phase_lag_error", (lag - x.atan()).abs());
    }

    // reference profile: run-averaged intensity
    let masses = bin_integrals(|r| run_mean(&s.drive, r, s.t_end).unwrap_or(f64::NAN), &bins).stage("reference profile")?;
    let region_mass: f64 = masses.iter().sum();
    if region_mass <= 0.0 {
        return Err(Error::domain("the drive has no intensity over the region")).stage("reference profile");
    }
    let reference = BinnedDistribution::new(bins.clone(), masses.clone())?.normalized()?;
    let grid_profile = grid
        .points()
        .iter()
        .map(|&r| run_mean(&s.drive, r, s.t_end))
        .collect::<Result<Vec<_>>>()
        .stage("reference profile")?;
    insert(&mut stats, "profile_visibility", visibility(&grid_profile).stage("reference profile")?);
    let overlay_grid = Grid::uniform(s.region.lo, s.region.hi, 4 * s.bins + 1)?;
    let profile = Profile {
        positions: overlay_grid.points().to_vec(),
        density: overlay_grid
            .points()
            .iter()
            .map(|&r| run_mean(&s.drive, r, s.t_end).map(|v| v / region_mass))
            .collect::<Result<_>>()
            .stage("reference profile")?,
    };

    // stochastic side
    let creation = params.creation_coefficient() * s.ensemble;
    let rate = Scaled {
        inner: &s.drive,
        factor: creation,
    };
    let bound = s.rate_bound.map_or(RateBound::Analytic, RateBound::Given);
    let log = simulate(&params, &rate, s.region, s.t_end, s.seed, bound).stage("pointprocess")?;
    let births = log.birth_count();
    insert(&mut stats, "births", births as f64);
    insert(&mut stats, "events", log.events.len() as f64);
    insert(&mut stats, "rate_bound", log.rate_bound);
    insert(&mut stats, "bin_width", s.region.length() / s.bins as f64);

    let expected_births = creation * s.t_end * region_mass;
    insert(&mut stats, "birth_count_expected", expected_births);
    insert(&mut stats, "birth_count_z", (births as f64 - expected_births).abs() / expected_births.sqrt());

    let histogram = birth_histogram(&log, &bins).stage("histogram")?;
    if births > 0 {
        insert(&mut stats, "histogram_visibility", visibility(histogram.weights()).stage("histogram")?);
        let chi = chi_square_test(&histogram, &reference).stage("chi-square")?;
        insert(&mut stats, "chi_square_statistic", chi.statistic);
        insert(&mut stats, "chi_square_dof", chi.dof as f64);
        insert(&mut stats, "chi_square_p_value", chi.p_value);
        insert(&mut stats, "l1_distance", l1_distance(&histogram, &reference)?);
        insert(&mut stats, "l1_noise_sigma", l1_noise_sigma(births));
    }
    if let Some(n) = s.coarse_bins {
        let coarse = birth_histogram(&log, &Bins::uniform(s.region, n)?).stage("histogram")?;
        insert(&mut stats, "histogram_visibility_coarse", visibility(coarse.weights()).stage("histogram")?);
    }

    if let Some(spacing) = s.drive.field().and_then(|f| fringe_spacing(f).ok()) {
        let found = dominant_period(&bins.centers(), histogram.weights()).stage("fringe spacing")?;
        insert(&mut stats, "fringe_spacing", found);
        insert(&mut stats, "fringe_spacing_expected", spacing);
        insert(&mut stats, "fringe_spacing_error", (found - spacing).abs());
    }

    if !s.checkpoints.is_empty() {
        let mut monotone = true;
        let mut previous: Option<(f64, f64)> = None;
        for &n in &s.checkpoints {
            let h = birth_histogram_first(&log, &bins, n).stage("buildup")?;
            let l1 = l1_distance(&h, &reference)?;
            let sigma = l1_noise_sigma(n);
            insert(&mut stats, &format!("l1_at_{n}"), l1);
            if let Some((prev_l1, prev_sigma)) = previous {
                monotone &= l1 <= prev_l1 + 2.0 * prev_sigma;
            }
            previous = Some((l1, sigma));
        }
        insert(&mut stats, "buildup_monotone", if monotone { 1.0 } else { 0.0 });
    }

    if let Some([a, b]) = s.occupancy_window {
        let (start, end) = (a * tau, (b * tau).min(s.t_end));
        let window = end - start;
        let occupancy = time_averaged_occupancy(&log, &bins, start, end).stage("occupancy")?;
        let gain = params.equilibrium_gain() * s.ensemble;
        let mut max_z: f64 = 0.0;
        for (observed, mass) in occupancy.iter().zip(&masses) {
            let mean = gain * mass;
            let sd = time_averaged_variance(mean, tau, window).sqrt();
            if sd > 0.0 {
                max_z = max_z.max((observed - mean).abs() / sd);
            } else if *observed > 0.0 {
                max_z = f64::INFINITY;
            }
        }
        insert(&mut stats, "occupancy_max_z", max_z);
        let population = time_averaged_population(&log, start, end).stage("occupancy")?;
        let expected = gain * region_mass;
        insert(&mut stats, "population_mean", population);
        insert(&mut stats, "population_expected", expected);
        insert(
            &mut stats,
            "population_z",
            (population - expected).abs() / time_averaged_variance(expected, tau, window).sqrt(),
        );
    }

    if let Some(n) = s.ks_samples {
        // births late in the run may outlive it; keep those with ≥ 20τ left
        let cutoff = s.t_end - 20.0 * tau;
        let particles = log.particles();
        let lifetimes: Vec<f64> = particles
            .iter()
            .filter(|p| p.birth <= cutoff)
            .filter_map(|p| p.death.map(|d| d - p.birth))
            .take(n)
            .collect();
        let gaps: Vec<f64> = particles.windows(2).take(n).map(|w| w[1].birth - w[0].birth).collect();
        if lifetimes.len() < n || gaps.len() < n {
            return Err(Error::Precondition(format!(
                "KS checks need {n} samples, have {} lifetimes and {} gaps",
                lifetimes.len(),
                gaps.len()
            )))
            .stage("ks");
        }
        let total_rate = creation * region_mass;
        let critical = ks_critical_value(n, SIGNIFICANCE);
        let d_life = ks_statistic(&lifetimes, |x| -(-x / tau).exp_m1())?;
        let d_gap = ks_statistic(&gaps, |x| -(-x * total_rate).exp_m1())?;
        let mean_life = lifetimes.iter().sum::<f64>() / n as f64;
        insert(&mut stats, "ks_critical", critical);
        insert(&mut stats, "lifetime_ks", d_life);
        insert(&mut stats, "lifetime_ks_ratio", d_life / critical);
        insert(&mut stats, "interbirth_ks", d_gap);
        insert(&mut stats, "interbirth_ks_ratio", d_gap / critical);
        insert(&mut stats, "lifetime_mean", mean_life);
        insert(&mut stats, "lifetime_mean_z", (mean_life - tau).abs() / (tau / (n as f64).sqrt()));
    }

    let mut outcomes = BTreeMap::new();
    for (name, threshold) in &s.thresholds {
        let value = *stats.get(name).ok_or_else(|| {
            Error::InvalidSpec(format!(
                "scenario {}: threshold on {name}, which this scenario does not compute",
                s.name
            ))
        })?;
        outcomes.insert(
            name.clone(),
            Outcome {
                value,
                min: threshold.min,
                max: threshold.max,
                passed: threshold.admits(value),
            },
        );
    }

    Ok(ResultBundle {
        scenario: s.clone(),
        series,
        log,
        histogram,
        reference,
        profile,
        statistics: stats,
        outcomes,
    })
}

/// Standard deviation of the L1 distance between an `n`-sample histogram and
/// its parent distribution, upper bound over bin layouts.
pub fn l1_noise_sigma(n: usize) -> f64 {
    ((1.0 - 2.0 / PI) / n as f64).sqrt()
}

/// Names of the built-in scenarios, in registry order.
pub const SCENARIO_NAMES: [&str; 8] = [
    "wiener_normal",
    "wiener_45_s",
    "wiener_45_p",
    "double_slit_buildup",
    "packet_relaxation",
    "eigenstate_steady",
    "born_violation",
    "constant_rate_sanity",
];

/// The built-in registry.
pub fn list_scenarios() -> Vec<Scenario> {
    SCENARIO_NAMES
        .iter()
        .map(|n| scenario(n).expect("registry names resolve"))
        .collect()
}

/// Looks up a built-in scenario by name.
pub fn scenario(name: &str) -> Option<Scenario> {
    let s = match name {
        "wiener_normal" => wiener_normal(),
        "wiener_45_s" => wiener_oblique(Polarization::S),
        "wiener_45_p" => wiener_oblique(Polarization::P),
        "double_slit_buildup" => double_slit_buildup(),
        "packet_relaxation" => packet_relaxation(),
        "eigenstate_steady" => eigenstate_steady(),
        "born_violation" => born_violation(),
        "constant_rate_sanity" => constant_rate_sanity(),
        _ => return None,
    };
    Some(s)
}

fn thresholds<const N: usize>(entries: [(&str, Threshold); N]) -> BTreeMap<String, Threshold> {
    entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn photon(omega: f64) -> KineticParams {
    KineticParams::photon(omega, Calibration::Tau(1.0)).expect("positive constants")
}

fn matter(omega: f64) -> KineticParams {
    KineticParams::matter(omega, Calibration::Tau(1.0)).expect("positive constants")
}

fn base(name: &str, description: &str, params: KineticParams, drive: Drive, region: Region) -> Scenario {
    Scenario {
        name: name.to_string(),
        description: description.to_string(),
        params,
        drive,
        region,
        grid_points: 101,
        bins: 100,
        t_end: 50.0,
        dt: 0.05,
        record_every: 1,
        seed: 42,
        ensemble: 1.0,
        rate_bound: None,
        initial: InitialState::Empty,
        born_transient: 10.0,
        steady_state: true,
        companion_tau_factor: None,
        occupancy_window: None,
        ks_samples: None,
        coarse_bins: None,
        checkpoints: Vec::new(),
        thresholds: BTreeMap::new(),
    }
}

// λ = 0.5 light, so k = ω = 4π and the normal-incidence fringe spacing is 0.25.
const WIENER_K: f64 = 4.0 * PI;

fn wiener_normal() -> Scenario {
    let params = photon(WIENER_K);
    // ⟨E²⟩ = 2E0² sin²kz averages to E0² over whole fringes; 10⁵ births in 50τ
    let region = Region { lo: 0.0, hi: 2.5 };
    let e0_sq = 1e5 / (params.gamma() * region.length() * 50.0);
    let mut s = base(
        "wiener_normal",
        "Standing light wave at normal incidence: photon births concentrate at the antinodes",
        params,
        Drive::Field {
            field: FieldSpec::StandingWaveNormal {
                amplitude: e0_sq.sqrt(),
                wavenumber: WIENER_K,
                angular_frequency: WIENER_K,
            },
            scale: 1.0,
        },
        region,
    );
    s.dt = 0.005;
    // five samples per optical period, so the recorded phases do not alias
    s.record_every = 20;
    s.occupancy_window = Some([10.0, 50.0]);
    s.thresholds = thresholds([
        ("profile_visibility", Threshold::at_least(0.99)),
        ("chi_square_p_value", Threshold::at_least(SIGNIFICANCE)),
        ("fringe_spacing_error", Threshold::at_most(0.025)),
        ("occupancy_max_z", Threshold::at_most(NSIGMA)),
    ]);
    s
}

fn wiener_oblique(polarization: Polarization) -> Scenario {
    let params = photon(WIENER_K);
    let spacing = PI / (WIENER_K * FRAC_PI_4.cos());
    let region = Region {
        lo: 0.0,
        hi: 10.0 * spacing,
    };
    // both polarizations average to E0² over whole fringes
    let (name, births, description) = match polarization {
        Polarization::S => (
            "wiener_45_s",
            1e5,
            "Standing wave at 45° with s-polarization: fringes with spacing λ/(2 cos 45°)",
        ),
        Polarization::P => (
            "wiener_45_p",
            1e6,
            "Standing wave at 45° with p-polarization: crossed components expose the film uniformly",
        ),
    };
    let e0_sq = births / (params.gamma() * region.length() * 50.0);
    let mut s = base(
        name,
        description,
        params,
        Drive::Field {
            field: FieldSpec::ObliqueStanding {
                amplitude: e0_sq.sqrt(),
                wavenumber: WIENER_K,
                angular_frequency: WIENER_K,
                incidence_angle: FRAC_PI_4,
                polarization,
            },
            scale: 1.0,
        },
        region,
    );
    s.dt = 0.005;
    // five samples per optical period, so the recorded phases do not alias
    s.record_every = 20;
    s.thresholds = match polarization {
        Polarization::S => thresholds([
            ("profile_visibility", Threshold::at_least(0.99)),
            ("chi_square_p_value", Threshold::at_least(SIGNIFICANCE)),
            ("fringe_spacing_error", Threshold::at_most(region.length() / 100.0)),
        ]),
        Polarization::P => {
            s.coarse_bins = Some(10);
            thresholds([
                ("profile_visibility", Threshold::at_most(0.01)),
                ("histogram_visibility_coarse", Threshold::at_most(0.01)),
                ("chi_square_p_value", Threshold::at_least(SIGNIFICANCE)),
            ])
        }
    };
    s
}

fn double_slit_buildup() -> Scenario {
    let params = photon(WIENER_K);
    let field = FieldSpec::DoubleSlitFarField {
        slit_separation: 5.0,
        slit_width: 1.0,
        wavelength: 0.5,
        screen_distance: 100.0,
    };
    let region = Region { lo: -60.0, hi: 60.0 };
    let t_end = 30.0;
    let area = quadrature::integrate(
        |x| instantaneous_intensity(&field, x, 0.0).unwrap_or(f64::NAN),
        region.lo,
        region.hi,
        &[],
        240,
        Tolerance::relative(1e-12),
    )
    .expect("double-slit profile integrates")
    .value;
    // a little over 10⁶ births so the last checkpoint is always reachable
    let scale = 1.02e6 / (params.gamma() * area * t_end);
    let mut s = base(
        "double_slit_buildup",
        "Far-field double slit: single detection points accumulate into the Fraunhofer fringes",
        params,
        Drive::Field { field, scale },
        region,
    );
    s.grid_points = 241;
    s.bins = 120;
    s.t_end = t_end;
    s.record_every = 10;
    s.checkpoints = vec![1_000, 10_000, 100_000, 1_000_000];
    s.thresholds = thresholds([
        ("l1_distance", Threshold::at_most(0.02)),
        ("buildup_monotone", Threshold::at_least(1.0)),
        ("chi_square_p_value", Threshold::at_least(SIGNIFICANCE)),
    ]);
    s
}

fn packet_relaxation() -> Scenario {
    // spreading time T = 2mσ0² = 100τ
    let (sigma0, k0, mass) = (1.0, 1.0, 50.0);
    let params = matter(k0 * k0 / (2.0 * mass));
    let region = Region { lo: -12.0, hi: 24.0 };
    let t_end = 300.0;
    let mut s = base(
        "packet_relaxation",
        "Spreading Gaussian packet: the density tracks |ψ|² while the spreading time is long compared to τ",
        params,
        Drive::Field {
            field: FieldSpec::GaussianPacket {
                initial_width: sigma0,
                mean_wavenumber: k0,
                mass,
            },
            scale: 1.0,
        },
        region,
    );
    s.grid_points = 145;
    s.bins = 72;
    s.t_end = t_end;
    s.record_every = 20;
    s.ensemble = 1e5 / t_end;
    s.initial = InitialState::Born;
    s.born_transient = 0.0;
    s.steady_state = false;
    s.companion_tau_factor = Some(100.0);
    s.thresholds = thresholds([
        ("born_deviation", Threshold::at_most(0.05)),
        ("born_deviation_tau_scaled", Threshold::at_least(0.3)),
        ("chi_square_p_value", Threshold::at_least(SIGNIFICANCE)),
    ]);
    s
}

fn eigenstate_steady() -> Scenario {
    let (length, mass) = (1.0, 1.0);
    let energy = PI * PI / (2.0 * mass * length * length);
    let mut s = base(
        "eigenstate_steady",
        "Ground state of a box: the steady density equals |ψ|² exactly",
        matter(energy),
        Drive::Field {
            field: FieldSpec::BoxEigenstate {
                quantum_number: 1,
                box_length: length,
                mass,
            },
            scale: 1.0,
        },
        Region { lo: 0.0, hi: length },
    );
    s.grid_points = 51;
    s.bins = 50;
    s.t_end = 40.0;
    s.ensemble = 2500.0;
    s.born_transient = 20.0;
    s.thresholds = thresholds([
        ("born_ratio_error", Threshold::at_most(1e-6)),
        ("born_deviation", Threshold::at_most(1e-6)),
        ("chi_square_p_value", Threshold::at_least(SIGNIFICANCE)),
    ]);
    s
}

fn born_violation() -> Scenario {
    let mut s = base(
        "born_violation",
        "Intensity switching every τ: the first-order lag cannot follow, so the density departs from the Born value",
        matter(1.0),
        Drive::SquareWave(SquareWave {
            high: 1.0,
            low: 0.0,
            half_period: 1.0,
        }),
        Region { lo: 0.0, hi: 1.0 },
    );
    s.grid_points = 5;
    s.bins = 10;
    s.t_end = 40.0;
    s.ensemble = 1000.0;
    s.thresholds = thresholds([("born_deviation", Threshold::at_least(0.3))]);
    s
}

fn constant_rate_sanity() -> Scenario {
    // λ = 1 plane wave over four wavelengths: the region-integrated rate is
    // constant in time, so births form a homogeneous Poisson process
    let k = 2.0 * PI;
    let params = photon(k);
    let region = Region { lo: 0.0, hi: 4.0 };
    // mean alive population ν̄·V·τ = γ·E0²/2 · V · τ = 1000
    let e0_sq = 2.0 * 1000.0 / (params.gamma() * region.length() * params.tau());
    let mut s = base(
        "constant_rate_sanity",
        "Plane wave: uniform exposure on average, Poisson births and exponential lifetimes",
        params,
        Drive::Field {
            field: FieldSpec::PlaneWave {
                amplitude: e0_sq.sqrt(),
                wavenumber: k,
                angular_frequency: k,
            },
            scale: 1.0,
        },
        region,
    );
    s.grid_points = 41;
    s.bins = 40;
    s.occupancy_window = Some([10.0, 50.0]);
    s.ks_samples = Some(10_000);
    s.thresholds = thresholds([
        ("population_z", Threshold::at_most(NSIGMA)),
        ("birth_count_z", Threshold::at_most(NSIGMA)),
        ("lifetime_ks_ratio", Threshold::at_most(1.0)),
        ("interbirth_ks_ratio", Threshold::at_most(1.0)),
        ("lifetime_mean_z", Threshold::at_most(NSIGMA)),
    ]);
    s
}

/// Sinusoidally driven run for measuring the low-pass response at `Ωτ`.
pub fn low_pass_scenario(omega_tau: f64) -> Result<Scenario> {
    if !(omega_tau.is_finite() && omega_tau > 0.0) {
        return Err(Error::domain(format!("Ωτ must be positive, got {omega_tau}")));
    }
    let period = 2.0 * PI / omega_tau;
    let mut s = base(
        &format!("low_pass_{omega_tau}"),
        "Sinusoidal intensity: amplitude ratio and phase lag of the density",
        matter(1.0),
        Drive::Sinusoid(Sinusoid {
            mean: 1.0,
            amplitude: 0.5,
            angular_frequency: omega_tau,
        }),
        Region { lo: 0.0, hi: 1.0 },
    );
    s.grid_points = 2;
    s.bins = 4;
    s.born_transient = 30.0;
    s.t_end = 30.0 + 4.0 * period.max(1.0);
    s.dt = (1.0 / 200.0f64).min(period / 400.0);
    s.ensemble = 10.0;
    s.thresholds = thresholds([
        ("amplitude_ratio_error", Threshold::at_most(1e-3)),
        ("phase_lag_error", Threshold::at_most(1e-3)),
    ]);
    Ok(s)
}
