//! Deterministic creation–decay kinetics.
//!
//! Particles are created at rate `ν₊ ∝ I(t, r)` and decay at rate `p/τ`, so
//! the density obeys the relaxation equation
//!
//! ```text
//! dp/dt = (g·I(t, r) − p) / τ
//! ```
//!
//! pointwise in space, where the gain `g` is `γτ` for photons and `γβτ`
//! for matter. Calibration ties the constants together: `4π·γτω = 1` for
//! photons and `γωτ = 1`, `β = ω` for matter (natural units, `ħ = 1`).

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drive::Intensity;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::quadrature::{self, Tolerance};
use crate::wavefield::{instantaneous_intensity, mean_intensity, FieldSpec, TimeWindow};

/// Largest admissible step as a fraction of `τ`.
pub const MAX_STEP_FRACTION: f64 = 1.0 / 20.0;

/// Relative tolerance of [`closed_form_density`].
pub const CLOSED_FORM_RTOL: f64 = 1e-10;

const FOUR_PI: f64 = 4.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Photon,
    Matter,
}

/// The free constant supplied alongside `ω`; the other one is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Calibration {
    Tau(f64),
    Gamma(f64),
}

/// Kinetic constants with the calibration identities enforced at
/// construction. `β = ω` in both modes (energy quantum `ħω`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRecord", into = "ParamsRecord")]
pub struct KineticParams {
    mode: Mode,
    gamma: f64,
    omega: f64,
    tau: f64,
    beta: f64,
}

fn closure(mode: Mode, gamma: f64, omega: f64, tau: f64) -> f64 {
    match mode {
        Mode::Matter => gamma * tau * omega,
        Mode::Photon => FOUR_PI * gamma * tau * omega,
    }
}

/// Walks a few ulps around `start` looking for a value that makes `check`
/// evaluate to exactly 1; falls back to the closest one found.
fn nudge(start: f64, eval: impl Fn(f64) -> f64) -> f64 {
    let mut best = start;
    let mut best_err = (eval(start) - 1.0).abs();
    if best_err == 0.0 {
        return start;
    }
    let (mut up, mut down) = (start, start);
    for _ in 0..4 {
        up = up.next_up();
        down = down.next_down();
        for cand in [up, down] {
            let err = (eval(cand) - 1.0).abs();
            if err < best_err {
                best = cand;
                best_err = err;
                if err == 0.0 {
                    return best;
                }
            }
        }
    }
    best
}

impl KineticParams {
    pub fn new(mode: Mode, omega: f64, calibration: Calibration) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::Calibration(format!("omega must be positive, got {omega}")));
        }
        let (gamma, tau) = match calibration {
            Calibration::Tau(tau) => {
                if !(tau.is_finite() && tau > 0.0) {
                    return Err(Error::Calibration(format!("tau must be positive, got {tau}")));
                }
                let raw = match mode {
                    Mode::Matter => 1.0 / (omega * tau),
                    Mode::Photon => 1.0 / (FOUR_PI * omega * tau),
                };
                (nudge(raw, |g| closure(mode, g, omega, tau)), tau)
            }
            Calibration::Gamma(gamma) => {
                if !(gamma.is_finite() && gamma > 0.0) {
                    return Err(Error::Calibration(format!("gamma must be positive, got {gamma}")));
                }
                let raw = match mode {
                    Mode::Matter => 1.0 / (gamma * omega),
                    Mode::Photon => 1.0 / (FOUR_PI * gamma * omega),
                };
                (gamma, nudge(raw, |t| closure(mode, gamma, omega, t)))
            }
        };
        let params = Self {
            mode,
            gamma,
            omega,
            tau,
            beta: omega,
        };
        if !(gamma.is_finite() && gamma > 0.0 && tau.is_finite() && tau > 0.0) {
            return Err(Error::Calibration(format!("derived constants out of range: {params:?}")));
        }
        Ok(params)
    }

    pub fn matter(omega: f64, calibration: Calibration) -> Result<Self> {
        Self::new(Mode::Matter, omega, calibration)
    }

    pub fn photon(omega: f64, calibration: Calibration) -> Result<Self> {
        Self::new(Mode::Photon, omega, calibration)
    }

    /// Accepts an over-determined set only if it satisfies the calibration
    /// identity to a few ulps.
    pub fn from_parts(mode: Mode, omega: f64, tau: f64, gamma: f64) -> Result<Self> {
        let derived = Self::new(mode, omega, Calibration::Tau(tau))?;
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Calibration(format!("gamma must be positive, got {gamma}")));
        }
        let product = closure(mode, gamma, omega, tau);
        if (product - 1.0).abs() > 8.0 * f64::EPSILON {
            let identity = match mode {
                Mode::Matter => "γ·τ·ω = 1",
                Mode::Photon => "4π·γ·τ·ω = 1",
            };
            return Err(Error::Calibration(format!(
                "inconsistent constants: {identity} evaluates to {product} for gamma = {gamma}, tau = {tau}, omega = {omega}"
            )));
        }
        Ok(Self { gamma, ..derived })
    }

    /// Same mode and `ω`, new lifetime.
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.mode, self.omega, Calibration::Tau(tau))
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `γτω` (matter) or `4πγτω` (photon); 1 by construction.
    pub fn calibration_product(&self) -> f64 {
        closure(self.mode, self.gamma, self.omega, self.tau)
    }

    /// Coefficient of the intensity in the creation rate: `γ` or `γβ/ħ`.
    pub fn creation_coefficient(&self) -> f64 {
        match self.mode {
            Mode::Photon => self.gamma,
            Mode::Matter => self.gamma * self.beta,
        }
    }

    /// Equilibrium density per unit intensity: `γτ` or `γβτ/ħ`.
    pub fn equilibrium_gain(&self) -> f64 {
        match self.mode {
            Mode::Photon => self.gamma * self.tau,
            Mode::Matter => self.gamma * self.tau * self.beta,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ParamsRecord {
    mode: Mode,
    omega: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
}

impl TryFrom<ParamsRecord> for KineticParams {
    type Error = Error;

    fn try_from(rec: ParamsRecord) -> Result<Self> {
        let params = match (rec.tau, rec.gamma) {
            (Some(tau), Some(gamma)) => KineticParams::from_parts(rec.mode, rec.omega, tau, gamma)?,
            (Some(tau), None) => KineticParams::new(rec.mode, rec.omega, Calibration::Tau(tau))?,
            (None, Some(gamma)) => KineticParams::new(rec.mode, rec.omega, Calibration::Gamma(gamma))?,
            (None, None) => return Err(Error::Calibration("either tau or gamma must be given".into())),
        };
        if let Some(beta) = rec.beta {
            if beta != params.beta {
                return Err(Error::Calibration(format!(
                    "beta must equal omega ({}) in natural units, got {beta}",
                    params.beta
                )));
            }
        }
        Ok(params)
    }
}

impl From<KineticParams> for ParamsRecord {
    fn from(p: KineticParams) -> Self {
        ParamsRecord {
            mode: p.mode,
            omega: p.omega,
            tau: Some(p.tau),
            gamma: Some(p.gamma),
            beta: Some(p.beta),
        }
    }
}

/// Density `p(t, r)` (or `n(t, r)` for photons) sampled on a space-time grid,
/// stored row-major as `times × grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySeries {
    params: KineticParams,
    grid: Grid,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl DensitySeries {
    pub fn new(params: KineticParams, grid: Grid, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("series times must be non-empty and strictly increasing"));
        }
        if values.len() != times.len() * grid.len() {
            return Err(Error::domain(format!(
                "series shape mismatch: {} values for {} times × {} points",
                values.len(),
                times.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::domain("series values must be finite and non-negative"));
        }
        Ok(Self {
            params,
            grid,
            times,
            values,
        })
    }

    pub fn params(&self) -> &KineticParams {
        &self.params
    }

    pub fn mode(&self) -> Mode {
        self.params.mode
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, time_index: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[time_index * n..(time_index + 1) * n]
    }

    pub fn value(&self, time_index: usize, point: usize) -> f64 {
        self.values[time_index * self.grid.len() + point]
    }

    pub fn column(&self, point: usize) -> Vec<f64> {
        (0..self.times.len()).map(|i| self.value(i, point)).collect()
    }
}

/// Node times of the fixed-step scheme, with nodes snapped onto any
/// intensity breakpoint closer than `1e-9·h`.
fn step_nodes(t_end: f64, dt: f64, breakpoints: &[f64]) -> (Vec<f64>, f64) {
    let n = ((t_end / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = t_end / n as f64;
    let mut nodes: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    nodes[n] = t_end;
    for &b in breakpoints {
        let i = (b / h).round() as usize;
        if i > 0 && i < n && (nodes[i] - b).abs() <= 1e-9 * h {
            nodes[i] = b;
        }
    }
    (nodes, h)
}

fn left_limit(t: f64) -> f64 {
    if t > 0.0 {
        t.next_down()
    } else {
        t
    }
}

fn checked(value: f64, t: f64, r: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(format!("intensity at (t = {t}, r = {r}) is {value}")))
    }
}

/// One classical RK4 step of `dp/dt = (g·I − p)/τ` over `[a, b]`, with the
/// intensity at `b` taken as a left limit.
fn rk4_step<I: Intensity + ?Sized>(intensity: &I, gain: f64, tau: f64, r: f64, p: f64, a: f64, b: f64) -> Result<f64> {
    let h = b - a;
    let mid = 0.5 * (a + b);
    let fa = gain * checked(intensity.value(a, r), a, r)?;
    let fm = gain * checked(intensity.value(mid, r), mid, r)?;
    let fb = gain * checked(intensity.value(left_limit(b), r), b, r)?;
    let k1 = (fa - p) / tau;
    let k2 = (fm - (p + 0.5 * h * k1)) / tau;
    let k3 = (fm - (p + 0.5 * h * k2)) / tau;
    let k4 = (fb - (p + h * k3)) / tau;
    Ok(p + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// Integrates the relaxation equation at every grid point, recording every
/// step.
pub fn integrate_kinetics<I: Intensity + ?Sized>(
    params: &KineticParams,
    intensity: &I,
    p0: &[f64],
    grid: &Grid,
    t_end: f64,
    dt: f64,
) -> Result<DensitySeries> {
    integrate_kinetics_recorded(params, intensity, p0, grid, t_end, dt, 1)
}

/// As [`integrate_kinetics`], keeping every `record_every`-th step plus the
/// final one.
pub fn integrate_kinetics_recorded<I: Intensity + ?Sized>(
    params: &KineticParams,
    intensity: &I,
    p0: &[f64],
    grid: &Grid,
    t_end: f64,
    dt: f64,
    record_every: usize,
) -> Result<DensitySeries> {
    let tau = params.tau();
    let max_dt = tau * MAX_STEP_FRACTION;
    if !(dt.is_finite() && dt > 0.0) || dt > max_dt * (1.0 + 1e-12) {
        return Err(Error::StepSize { dt, max: max_dt });
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::domain(format!("t_end must be positive, got {t_end}")));
    }
    if p0.len() != grid.len() {
        return Err(Error::domain(format!(
            "initial density has {} values for {} grid points",
            p0.len(),
            grid.len()
        )));
    }
    if let Some(bad) = p0.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::domain(format!("initial density must be non-negative, found {bad}")));
    }
    let record_every = record_every.max(1);

    let mut breakpoints = intensity.breakpoints(0.0, t_end);
    breakpoints.sort_by(f64::total_cmp);
    let (nodes, h) = step_nodes(t_end, dt, &breakpoints);
    let n = nodes.len() - 1;
    let recorded: Vec<usize> = (0..=n).filter(|i| i % record_every == 0 || *i == n).collect();
    let gain = params.equilibrium_gain();

    let columns: Vec<Vec<f64>> = grid
        .points()
        .par_iter()
        .zip(p0.par_iter())
        .map(|(&r, &start)| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(recorded.len());
            let mut p = start;
            let mut next = 0;
            if recorded[0] == 0 {
                out.push(p);
                next = 1;
            }
            let mut bp = 0;
            for i in 0..n {
                let (a, b) = (nodes[i], nodes[i + 1]);
                while bp < breakpoints.len() && breakpoints[bp] <= a + 1e-9 * h {
                    bp += 1;
                }
                let mut start_t = a;
                while bp < breakpoints.len() && breakpoints[bp] < b - 1e-9 * h {
                    p = rk4_step(intensity, gain, tau, r, p, start_t, breakpoints[bp])?;
                    start_t = breakpoints[bp];
                    bp += 1;
                }
                p = rk4_step(intensity, gain, tau, r, p, start_t, b)?;
                if next < recorded.len() && recorded[next] == i + 1 {
                    out.push(p);
                    next += 1;
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let times: Vec<f64> = recorded.iter().map(|&i| nodes[i]).collect();
    let mut values = vec![0.0; times.len() * grid.len()];
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            values[i * grid.len() + j] = v.max(0.0);
        }
    }
    DensitySeries::new(*params, grid.clone(), times, values)
}

/// `γ'·e^{−t/τ}·∫₀ᵗ I(t′, r)·e^{t′/τ} dt′` by adaptive quadrature, i.e. the
/// exact solution started from an empty state.
pub fn closed_form_density<I: Intensity + ?Sized>(params: &KineticParams, intensity: &I, t: f64, r: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::domain(format!("time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let tau = params.tau();
    let pieces = ((t / tau).ceil() as usize).clamp(1, 512);
    let est = quadrature::integrate(
        |s| intensity.value(s, r) * (-(t - s) / tau).exp(),
        0.0,
        t,
        &intensity.breakpoints(0.0, t),
        pieces,
        Tolerance::relative(CLOSED_FORM_RTOL),
    )?;
    Ok(params.creation_coefficient() * est.value)
}

fn time_index_at_or_before(times: &[f64], t: f64) -> usize {
    times.partition_point(|&s| s <= t).saturating_sub(1)
}

/// Residual of the exact time-average identity
///
/// ```text
/// ⟨p⟩_t = g·⟨I⟩_t − (τ/t)·p(t)
/// ```
///
/// maximised over the grid. `⟨p⟩_t` is integrated from the series with
/// cubic Hermite panels whose end slopes come from the kinetic equation;
/// `⟨I⟩_t` by adaptive quadrature.
pub fn time_average_identity_residual<I: Intensity + ?Sized>(series: &DensitySeries, intensity: &I, t: f64) -> Result<f64> {
    let times = series.times();
    if times[0] != 0.0 || series.row(0).iter().any(|&v| v != 0.0) {
        return Err(Error::Precondition("the averaging identity requires p(0) = 0".into()));
    }
    let t_last = times[times.len() - 1];
    if !(t > 0.0 && t <= t_last) {
        return Err(Error::domain(format!("t = {t} outside the series range (0, {t_last}]")));
    }
    let params = series.params();
    let (tau, gain) = (params.tau(), params.equilibrium_gain());
    let breakpoints = intensity.breakpoints(0.0, t);

    let mut worst: f64 = 0.0;
    for (j, &r) in series.grid().points().iter().enumerate() {
        let slope = |time: f64, p: f64, left: bool| {
            let at = if left { left_limit(time) } else { time };
            (gain * intensity.value(at, r) - p) / tau
        };
        let last = time_index_at_or_before(times, t);
        let mut integral = 0.0;
        for i in 0..last {
            let (a, b) = (times[i], times[i + 1]);
            let (pa, pb) = (series.value(i, j), series.value(i + 1, j));
            let h = b - a;
            integral += 0.5 * h * (pa + pb) + h * h / 12.0 * (slope(a, pa, false) - slope(b, pb, true));
        }
        let p_t = if times[last] == t {
            series.value(last, j)
        } else {
            // partial Hermite panel [t_last_node, t]
            let (a, b) = (times[last], times[last + 1]);
            let (pa, pb) = (series.value(last, j), series.value(last + 1, j));
            let (ma, mb) = (slope(a, pa, false), slope(b, pb, true));
            let h = b - a;
            let s = (t - a) / h;
            let (s2, s3, s4) = (s * s, s * s * s, s * s * s * s);
            integral += h
                * (pa * (0.5 * s4 - s3 + s)
                    + h * ma * (0.25 * s4 - 2.0 * s3 / 3.0 + 0.5 * s2)
                    + pb * (-0.5 * s4 + s3)
                    + h * mb * (0.25 * s4 - s3 / 3.0));
            pa * (2.0 * s3 - 3.0 * s2 + 1.0) + h * ma * (s3 - 2.0 * s2 + s) + pb * (-2.0 * s3 + 3.0 * s2) + h * mb * (s3 - s2)
        };
        let mean_p = integral / t;
        let mean_i = quadrature::integrate(
            |s| intensity.value(s, r),
            0.0,
            t,
            &breakpoints,
            ((t / tau).ceil() as usize).clamp(1, 512),
            Tolerance::relative(1e-13).with_abs(1e-300),
        )?
        .value
            / t;
        let residual = (mean_p - (gain * mean_i - tau / t * p_t)).abs();
        worst = worst.max(residual);
    }
    Ok(worst)
}

/// Born-limit density: `g·|ψ(r, t)|²` for matter, `g·⟨E²⟩` averaged over one
/// optical period for photons. Stationary or matter fields use the
/// instantaneous intensity.
pub fn born_limit_density(params: &KineticParams, spec: &FieldSpec, r: f64, t: f64) -> Result<f64> {
    let intensity = match spec.period() {
        Some(period) => mean_intensity(spec, r, TimeWindow::new(0.0, period)?)?,
        None => instantaneous_intensity(spec, r, t)?,
    };
    Ok(params.equilibrium_gain() * intensity)
}

/// Size `Λ` of the critical field disturbance from `⟨E²⟩·Λ³ = ω` with the
/// proportionality constant fixed to 1.
pub fn critical_scale(mean_intensity: f64, omega: f64) -> Result<f64> {
    critical_scale_with(mean_intensity, omega, 1.0)
}

/// `Λ = (c·ω / ⟨E²⟩)^{1/3}` for a chosen constant `c`.
pub fn critical_scale_with(mean_intensity: f64, omega: f64, constant: f64) -> Result<f64> {
    if !(mean_intensity.is_finite() && mean_intensity > 0.0) {
        return Err(Error::domain(format!("mean intensity must be positive, got {mean_intensity}")));
    }
    if !(omega > 0.0 && constant > 0.0) {
        return Err(Error::domain("omega and the scale constant must be positive"));
    }
    Ok((constant * omega / mean_intensity).cbrt())
}
