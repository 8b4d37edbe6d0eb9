//! Closed-form wave fields driving particle creation.
//!
//! Optical variants describe a real electric field `E(z, t)`; their intensity
//! is `E²`. Matter variants describe a complex amplitude `ψ(x, t)` with
//! intensity `|ψ|²`. Units are natural (`ħ = c = 1`) and every field is
//! reduced to a single spatial coordinate.
//!
//! All optical intensities have the form `a(z) + b(z)·cos 2ωt + c(z)·sin 2ωt`,
//! which gives exact time averages over arbitrary windows.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::quadrature::{self, Tolerance};

/// Relative tolerance used when a time average has no closed form.
pub const MEAN_QUADRATURE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    /// Electric vector perpendicular to the plane of incidence.
    S,
    /// Electric vector in the plane of incidence.
    P,
}

/// Declarative description of an analytic wave field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    /// `E = E0·cos(kz − ωt)`.
    PlaneWave {
        amplitude: f64,
        wavenumber: f64,
        angular_frequency: f64,
    },
    /// Normal incidence on a perfect mirror at `z = 0`:
    /// `E = 2·E0·sin(kz)·sin(ωt)`, `z ≥ 0` measured from the mirror.
    StandingWaveNormal {
        amplitude: f64,
        wavenumber: f64,
        angular_frequency: f64,
    },
    /// Oblique incidence on a perfect mirror in the `z = 0` plane, sampled
    /// along the mirror normal.
    ObliqueStanding {
        amplitude: f64,
        wavenumber: f64,
        angular_frequency: f64,
        incidence_angle: f64,
        polarization: Polarization,
    },
    /// Fraunhofer two-slit pattern on a screen, peak intensity 1.
    DoubleSlitFarField {
        slit_separation: f64,
        slit_width: f64,
        wavelength: f64,
        screen_distance: f64,
    },
    /// Freely spreading Gaussian packet centred at the origin at `t = 0`.
    GaussianPacket {
        initial_width: f64,
        mean_wavenumber: f64,
        mass: f64,
    },
    /// Infinite square well eigenstate on `[0, box_length]`.
    BoxEigenstate {
        quantum_number: u32,
        box_length: f64,
        #[serde(default = "unit_mass")]
        mass: f64,
    },
    /// Coherent sum of matter fields.
    Superposition { terms: Vec<SuperpositionTerm> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionTerm {
    pub weight: Complex64,
    pub field: FieldSpec,
}

fn unit_mass() -> f64 {
    1.0
}

/// Half-open time interval `[start, end)` used for averaging.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: f64,
    pub end: f64,
}

impl TimeWindow {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::domain(format!("time window [{start}, {end}] has no positive length")));
        }
        Ok(Self { start, end })
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// `a + b·cos 2ωt + c·sin 2ωt` at a fixed position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonics {
    pub mean: f64,
    pub cos2: f64,
    pub sin2: f64,
    pub omega: f64,
}

impl Harmonics {
    pub fn window_mean(&self, window: TimeWindow) -> f64 {
        if self.cos2 == 0.0 && self.sin2 == 0.0 {
            return self.mean;
        }
        let w2 = 2.0 * self.omega;
        let (t0, t1) = (window.start, window.end);
        let span = w2 * (t1 - t0);
        // sin(a) − sin(b) and cos(b) − cos(a) in product form
        let half_diff = (0.5 * (w2 * t1 - w2 * t0)).sin();
        let half_sum = 0.5 * (w2 * t1 + w2 * t0);
        let dsin = 2.0 * half_sum.cos() * half_diff;
        let dcos = 2.0 * half_sum.sin() * half_diff;
        self.mean + (self.cos2 * dsin + self.sin2 * dcos) / span
    }
}

impl FieldSpec {
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be finite and strictly positive, got {v}")))
            }
        }
        match self {
            FieldSpec::PlaneWave {
                amplitude,
                wavenumber,
                angular_frequency,
            }
            | FieldSpec::StandingWaveNormal {
                amplitude,
                wavenumber,
                angular_frequency,
            } => {
                positive("amplitude", *amplitude)?;
                positive("wavenumber", *wavenumber)?;
                positive("angular_frequency", *angular_frequency)
            }
            FieldSpec::ObliqueStanding {
                amplitude,
                wavenumber,
                angular_frequency,
                incidence_angle,
                ..
            } => {
                positive("amplitude", *amplitude)?;
                positive("wavenumber", *wavenumber)?;
                positive("angular_frequency", *angular_frequency)?;
                if !(*incidence_angle > 0.0 && *incidence_angle < FRAC_PI_2) {
                    return Err(Error::invalid(format!(
                        "incidence_angle must lie in (0, π/2), got {incidence_angle}"
                    )));
                }
                Ok(())
            }
            FieldSpec::DoubleSlitFarField {
                slit_separation,
                slit_width,
                wavelength,
                screen_distance,
            } => {
                positive("slit_separation", *slit_separation)?;
                positive("slit_width", *slit_width)?;
                positive("wavelength", *wavelength)?;
                positive("screen_distance", *screen_distance)
            }
            FieldSpec::GaussianPacket {
                initial_width,
                mean_wavenumber,
                mass,
            } => {
                positive("initial_width", *initial_width)?;
                positive("mass", *mass)?;
                if !mean_wavenumber.is_finite() {
                    return Err(Error::invalid("mean_wavenumber must be finite"));
                }
                Ok(())
            }
            FieldSpec::BoxEigenstate {
                quantum_number,
                box_length,
                mass,
            } => {
                if *quantum_number < 1 {
                    return Err(Error::invalid("quantum_number must be at least 1"));
                }
                positive("box_length", *box_length)?;
                positive("mass", *mass)
            }
            FieldSpec::Superposition { terms } => {
                if terms.is_empty() {
                    return Err(Error::invalid("superposition has no terms"));
                }
                for term in terms {
                    if !(term.weight.re.is_finite() && term.weight.im.is_finite()) {
                        return Err(Error::invalid("superposition weight is not finite"));
                    }
                    if term.field.is_optical() {
                        return Err(Error::invalid("superposition may only contain matter fields"));
                    }
                    term.field.validate()?;
                }
                Ok(())
            }
        }
    }

    pub fn is_optical(&self) -> bool {
        matches!(
            self,
            FieldSpec::PlaneWave { .. }
                | FieldSpec::StandingWaveNormal { .. }
                | FieldSpec::ObliqueStanding { .. }
                | FieldSpec::DoubleSlitFarField { .. }
        )
    }

    pub fn is_matter(&self) -> bool {
        !self.is_optical()
    }

    /// Oscillation period `2π/ω` of the optical field, for the variants that
    /// oscillate in time.
    pub fn period(&self) -> Option<f64> {
        match self {
            FieldSpec::PlaneWave { angular_frequency, .. }
            | FieldSpec::StandingWaveNormal { angular_frequency, .. }
            | FieldSpec::ObliqueStanding { angular_frequency, .. } => Some(2.0 * PI / angular_frequency),
            _ => None,
        }
    }

    /// Intensity does not depend on time.
    pub fn is_stationary(&self) -> bool {
        matches!(
            self,
            FieldSpec::DoubleSlitFarField { .. } | FieldSpec::BoxEigenstate { .. }
        )
    }

    /// Inclusive spatial domain.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            FieldSpec::StandingWaveNormal { .. } | FieldSpec::ObliqueStanding { .. } => (0.0, f64::INFINITY),
            FieldSpec::BoxEigenstate { box_length, .. } => (0.0, *box_length),
            FieldSpec::Superposition { terms } => terms.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |acc, t| {
                let (lo, hi) = t.field.domain();
                (acc.0.max(lo), acc.1.min(hi))
            }),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn check_position(&self, r: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if r.is_finite() && r >= lo && r <= hi {
            Ok(())
        } else {
            Err(Error::domain(format!("position {r} outside field domain [{lo}, {hi}]")))
        }
    }

    /// Upper bound of the instantaneous intensity over the whole domain and
    /// all times `t ≥ 0`.
    pub fn supremum(&self) -> f64 {
        match self {
            FieldSpec::PlaneWave { amplitude, .. } => amplitude * amplitude,
            FieldSpec::StandingWaveNormal { amplitude, .. } => 4.0 * amplitude * amplitude,
            FieldSpec::ObliqueStanding {
                amplitude,
                incidence_angle,
                polarization,
                ..
            } => match polarization {
                Polarization::S => 4.0 * amplitude * amplitude,
                Polarization::P => {
                    let c2 = incidence_angle.cos().powi(2);
                    4.0 * amplitude * amplitude * c2.max(1.0 - c2)
                }
            },
            FieldSpec::DoubleSlitFarField { .. } => 1.0,
            FieldSpec::GaussianPacket { initial_width, .. } => 1.0 / ((2.0 * PI).sqrt() * initial_width),
            FieldSpec::BoxEigenstate { box_length, .. } => 2.0 / box_length,
            FieldSpec::Superposition { terms } => {
                let amp: f64 = terms.iter().map(|t| t.weight.norm() * t.field.supremum().sqrt()).sum();
                amp * amp
            }
        }
    }

    /// Complex amplitude of a matter field.
    pub fn psi(&self, x: f64, t: f64) -> Result<Complex64> {
        self.check_position(x)?;
        match self {
            FieldSpec::GaussianPacket {
                initial_width,
                mean_wavenumber,
                mass,
            } => {
                let (s0, k0, m) = (*initial_width, *mean_wavenumber, *mass);
                let alpha = Complex64::new(1.0, t / (2.0 * m * s0 * s0));
                let v = k0 / m;
                let dx = x - v * t;
                let norm = (2.0 * PI * s0 * s0).powf(-0.25);
                let exponent = -dx * dx / (4.0 * s0 * s0 * alpha) + Complex64::new(0.0, k0 * x - k0 * k0 * t / (2.0 * m));
                Ok(norm / alpha.sqrt() * exponent.exp())
            }
            FieldSpec::BoxEigenstate {
                quantum_number,
                box_length,
                mass,
            } => {
                let q = f64::from(*quantum_number);
                let energy = q * q * PI * PI / (2.0 * mass * box_length * box_length);
                let amp = (2.0 / box_length).sqrt() * (q * PI * x / box_length).sin();
                Ok(Complex64::from_polar(amp, -energy * t))
            }
            FieldSpec::Superposition { terms } => terms
                .iter()
                .try_fold(Complex64::new(0.0, 0.0), |acc, term| Ok(acc + term.weight * term.field.psi(x, t)?)),
            _ => Err(Error::invalid("optical fields have no complex amplitude")),
        }
    }

    /// Exact time-harmonic decomposition of an optical intensity at `z`.
    pub fn harmonics(&self, z: f64) -> Result<Option<Harmonics>> {
        self.check_position(z)?;
        let h = match self {
            FieldSpec::PlaneWave {
                amplitude,
                wavenumber,
                angular_frequency,
            } => {
                let half = 0.5 * amplitude * amplitude;
                let phase = 2.0 * wavenumber * z;
                Harmonics {
                    mean: half,
                    cos2: half * phase.cos(),
                    sin2: half * phase.sin(),
                    omega: *angular_frequency,
                }
            }
            FieldSpec::StandingWaveNormal {
                amplitude,
                wavenumber,
                angular_frequency,
            } => {
                let a = 2.0 * amplitude * amplitude * (wavenumber * z).sin().powi(2);
                Harmonics {
                    mean: a,
                    cos2: -a,
                    sin2: 0.0,
                    omega: *angular_frequency,
                }
            }
            FieldSpec::ObliqueStanding {
                amplitude,
                wavenumber,
                angular_frequency,
                incidence_angle,
                polarization,
            } => {
                let phi = wavenumber * incidence_angle.cos() * z;
                let e2 = 2.0 * amplitude * amplitude;
                match polarization {
                    Polarization::S => {
                        let a = e2 * phi.sin().powi(2);
                        Harmonics {
                            mean: a,
                            cos2: -a,
                            sin2: 0.0,
                            omega: *angular_frequency,
                        }
                    }
                    Polarization::P => {
                        // tangential part ∝ sin φ·sin ωt, normal part ∝ cos φ·cos ωt
                        let tangential = e2 * incidence_angle.cos().powi(2) * phi.sin().powi(2);
                        let normal = e2 * incidence_angle.sin().powi(2) * phi.cos().powi(2);
                        Harmonics {
                            mean: tangential + normal,
                            cos2: normal - tangential,
                            sin2: 0.0,
                            omega: *angular_frequency,
                        }
                    }
                }
            }
            FieldSpec::DoubleSlitFarField { .. } => Harmonics {
                mean: self.double_slit(z),
                cos2: 0.0,
                sin2: 0.0,
                omega: 1.0,
            },
            _ => return Ok(None),
        };
        Ok(Some(h))
    }

    fn double_slit(&self, x: f64) -> f64 {
        let FieldSpec::DoubleSlitFarField {
            slit_separation,
            slit_width,
            wavelength,
            screen_distance,
        } = self
        else {
            unreachable!("double_slit called on another variant");
        };
        let scale = PI * x / (wavelength * screen_distance);
        let interference = (slit_separation * scale).cos().powi(2);
        let u = slit_width * scale;
        let sinc = if u.abs() < 1e-8 { 1.0 - u * u / 6.0 } else { u.sin() / u };
        interference * sinc * sinc
    }
}

/// `E²(r, t)` for optical fields, `|ψ(r, t)|²` for matter fields.
pub fn instantaneous_intensity(spec: &FieldSpec, r: f64, t: f64) -> Result<f64> {
    spec.check_position(r)?;
    if !t.is_finite() {
        return Err(Error::domain(format!("time {t} is not finite")));
    }
    let value = match spec {
        FieldSpec::PlaneWave {
            amplitude,
            wavenumber,
            angular_frequency,
        } => (amplitude * (wavenumber * r - angular_frequency * t).cos()).powi(2),
        FieldSpec::StandingWaveNormal {
            amplitude,
            wavenumber,
            angular_frequency,
        } => (2.0 * amplitude * (wavenumber * r).sin() * (angular_frequency * t).sin()).powi(2),
        FieldSpec::ObliqueStanding {
            amplitude,
            wavenumber,
            angular_frequency,
            incidence_angle,
            polarization,
        } => {
            let phi = wavenumber * incidence_angle.cos() * r;
            let wt = angular_frequency * t;
            match polarization {
                Polarization::S => (2.0 * amplitude * phi.sin() * wt.sin()).powi(2),
                Polarization::P => {
                    let ex = 2.0 * amplitude * incidence_angle.cos() * phi.sin() * wt.sin();
                    let ez = 2.0 * amplitude * incidence_angle.sin() * phi.cos() * wt.cos();
                    ex * ex + ez * ez
                }
            }
        }
        FieldSpec::DoubleSlitFarField { .. } => spec.double_slit(r),
        FieldSpec::GaussianPacket {
            initial_width,
            mean_wavenumber,
            mass,
        } => {
            let sigma = initial_width * (1.0 + (t / (2.0 * mass * initial_width * initial_width)).powi(2)).sqrt();
            let dx = r - mean_wavenumber / mass * t;
            (-dx * dx / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma)
        }
        FieldSpec::BoxEigenstate {
            quantum_number,
            box_length,
            ..
        } => 2.0 / box_length * (f64::from(*quantum_number) * PI * r / box_length).sin().powi(2),
        FieldSpec::Superposition { .. } => {
            spec.validate()?;
            spec.psi(r, t)?.norm_sqr()
        }
    };
    Ok(value)
}

/// Time average of the intensity at `r` over `window`.
pub fn mean_intensity(spec: &FieldSpec, r: f64, window: TimeWindow) -> Result<f64> {
    if let FieldSpec::Superposition { .. } = spec {
        spec.validate()?;
    }
    if let Some(h) = spec.harmonics(r)? {
        return Ok(h.window_mean(window).max(0.0));
    }
    if spec.is_stationary() {
        return instantaneous_intensity(spec, r, window.start);
    }
    quadrature_mean(spec, r, window, MEAN_QUADRATURE_RTOL)
}

/// Time average by adaptive quadrature, regardless of any closed form.
pub fn quadrature_mean(spec: &FieldSpec, r: f64, window: TimeWindow, rtol: f64) -> Result<f64> {
    spec.check_position(r)?;
    let pieces = match spec.period() {
        Some(p) => ((window.length() / p).ceil() as usize).clamp(1, 4096),
        None => 8,
    };
    let est = quadrature::integrate(
        |t| instantaneous_intensity(spec, r, t).unwrap_or(f64::NAN),
        window.start,
        window.end,
        &[],
        pieces,
        Tolerance::relative(rtol).with_abs(1e-300),
    )?;
    Ok(est.value / window.length())
}

/// Time-averaged intensity at every grid point. Double-slit profiles are
/// normalised to unit integral over `[grid.first, grid.last]`.
pub fn transverse_profile(spec: &FieldSpec, grid: &Grid, window: TimeWindow) -> Result<Vec<f64>> {
    let mut profile = grid
        .points()
        .iter()
        .map(|&r| mean_intensity(spec, r, window))
        .collect::<Result<Vec<_>>>()?;
    if let FieldSpec::DoubleSlitFarField { .. } = spec {
        if grid.len() < 2 {
            return Err(Error::domain("cannot normalise a profile over a single point"));
        }
        let pieces = 256;
        let norm = quadrature::integrate(
            |x| spec.double_slit(x),
            grid.first(),
            grid.last(),
            &[],
            pieces,
            Tolerance::relative(1e-12),
        )?
        .value;
        if norm <= 0.0 {
            return Err(Error::domain("double-slit profile vanishes over the grid"));
        }
        profile.iter_mut().for_each(|v| *v /= norm);
    }
    Ok(profile)
}

/// Spatial period of the time-averaged intensity of a fringe-forming field.
pub fn fringe_spacing(spec: &FieldSpec) -> Result<f64> {
    spec.validate()?;
    match spec {
        FieldSpec::StandingWaveNormal { wavenumber, .. } => Ok(PI / wavenumber),
        FieldSpec::ObliqueStanding {
            wavenumber,
            incidence_angle,
            polarization: Polarization::S,
            ..
        } => Ok(PI / (wavenumber * incidence_angle.cos())),
        other => Err(Error::invalid(format!(
            "fringe spacing is defined for normal incidence and s-polarised oblique standing waves, not {}",
            other.kind_name()
        ))),
    }
}

impl FieldSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            FieldSpec::PlaneWave { .. } => "plane_wave",
            FieldSpec::StandingWaveNormal { .. } => "standing_wave_normal",
            FieldSpec::ObliqueStanding { .. } => "oblique_standing",
            FieldSpec::DoubleSlitFarField { .. } => "double_slit_far_field",
            FieldSpec::GaussianPacket { .. } => "gaussian_packet",
            FieldSpec::BoxEigenstate { .. } => "box_eigenstate",
            FieldSpec::Superposition { .. } => "superposition",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standing(e0: f64, k: f64, w: f64) -> FieldSpec {
        FieldSpec::StandingWaveNormal {
            amplitude: e0,
            wavenumber: k,
            angular_frequency: w,
        }
    }

    fn oblique(theta: f64, pol: Polarization) -> FieldSpec {
        FieldSpec::ObliqueStanding {
            amplitude: 1.3,
            wavenumber: 4.0 * PI,
            angular_frequency: 4.0 * PI,
            incidence_angle: theta,
            polarization: pol,
        }
    }

    #[test]
    fn standing_wave_node_at_mirror() {
        let s = standing(2.0, 3.0, 5.0);
        for t in [0.0, 0.1, 0.37, 12.5] {
            assert_eq!(instantaneous_intensity(&s, 0.0, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn plane_wave_peak_at_zero_phase() {
        let s = FieldSpec::PlaneWave {
            amplitude: 1.7,
            wavenumber: 2.0,
            angular_frequency: 3.0,
        };
        assert!((instantaneous_intensity(&s, 0.0, 0.0).unwrap() - 1.7 * 1.7).abs() < 1e-15);
    }

    #[test]
    fn standing_wave_antinode_peak() {
        let (e0, k, w) = (1.5, 2.0, 7.0);
        let s = standing(e0, k, w);
        let (z, t) = (PI / (2.0 * k), PI / (2.0 * w));
        let oracle = (2.0 * e0 * (k * z).sin() * (w * t).sin()).powi(2);
        let got = instantaneous_intensity(&s, z, t).unwrap();
        assert!((got - oracle).abs() < 1e-14);
        assert!((got - 4.0 * e0 * e0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_peak_at_origin() {
        let s = FieldSpec::GaussianPacket {
            initial_width: 0.7,
            mean_wavenumber: 1.0,
            mass: 2.0,
        };
        let want = 1.0 / (2.0 * PI * 0.49f64).sqrt();
        assert!((instantaneous_intensity(&s, 0.0, 0.0).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn out_of_domain_positions_rejected() {
        assert!(matches!(
            instantaneous_intensity(&standing(1.0, 1.0, 1.0), -0.1, 0.0),
            Err(Error::Domain(_))
        ));
        let b = FieldSpec::BoxEigenstate {
            quantum_number: 1,
            box_length: 2.0,
            mass: 1.0,
        };
        assert!(instantaneous_intensity(&b, 2.5, 0.0).is_err());
        assert!(instantaneous_intensity(&b, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn superposition_rejects_optical_terms() {
        let s = FieldSpec::Superposition {
            terms: vec![SuperpositionTerm {
                weight: Complex64::new(1.0, 0.0),
                field: standing(1.0, 1.0, 1.0),
            }],
        };
        assert!(matches!(instantaneous_intensity(&s, 0.5, 0.0), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn plane_wave_mean_over_period() {
        let s = FieldSpec::PlaneWave {
            amplitude: 2.0,
            wavenumber: 1.3,
            angular_frequency: 2.1,
        };
        let p = s.period().unwrap();
        for z in [0.0, 0.3, 1.9] {
            let m = mean_intensity(&s, z, TimeWindow::new(0.4, 0.4 + p).unwrap()).unwrap();
            assert!((m - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn standing_wave_mean_at_antinode() {
        let (e0, k, w) = (1.5, 2.0, 7.0);
        let s = standing(e0, k, w);
        let z = PI / (2.0 * k);
        let oracle = 4.0 * e0 * e0 * (k * z).sin().powi(2) * 0.5;
        let m = mean_intensity(&s, z, TimeWindow::new(0.0, 2.0 * PI / w).unwrap()).unwrap();
        assert!((m - oracle).abs() < 1e-13);
        assert!((m - 2.0 * e0 * e0).abs() < 1e-13);
    }

    #[test]
    fn oblique_p_at_45_degrees_is_uniform() {
        let s = oblique(PI / 4.0, Polarization::P);
        let win = TimeWindow::new(0.0, s.period().unwrap()).unwrap();
        let grid = Grid::uniform(0.0, 2.0, 4001).unwrap();
        let prof = transverse_profile(&s, &grid, win).unwrap();
        let (lo, hi) = prof.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        let mean = prof.iter().sum::<f64>() / prof.len() as f64;
        // two plane waves of mean E0²/2 each, orthogonal polarisations
        assert!((mean - 1.3 * 1.3).abs() < 1e-12);
        assert!(hi - lo <= 1e-12 * mean);

        let s30 = oblique(PI / 6.0, Polarization::P);
        let prof = transverse_profile(&s30, &grid, win).unwrap();
        let (lo, hi) = prof.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi - lo > 0.1);
    }

    #[test]
    fn double_slit_profile_shape() {
        let s = FieldSpec::DoubleSlitFarField {
            slit_separation: 5.0,
            slit_width: 1.0,
            wavelength: 0.5,
            screen_distance: 100.0,
        };
        let first_null = 0.5 * 100.0 / (2.0 * 5.0);
        let grid = Grid::new(vec![-20.0, -first_null, 0.0, first_null, 7.0, 20.0]).unwrap();
        let win = TimeWindow::new(0.0, 1.0).unwrap();
        let prof = transverse_profile(&s, &grid, win).unwrap();
        let peak = prof[2];
        assert!(prof.iter().all(|&v| v <= peak));
        let oracle = (PI * 5.0 * first_null / (0.5 * 100.0)).cos().powi(2);
        assert!(oracle < 1e-30);
        assert!(prof[3] <= 1e-12 * peak);
        assert!(prof[1] <= 1e-12 * peak);

        // normalised to unit integral over the grid extent
        let fine = Grid::uniform(-20.0, 20.0, 40_001).unwrap();
        let p = transverse_profile(&s, &fine, win).unwrap();
        let h = 40.0 / 40_000.0;
        let trap: f64 = p.windows(2).map(|w| 0.5 * (w[0] + w[1]) * h).sum();
        assert!((trap - 1.0).abs() < 1e-6);
    }

    #[test]
    fn box_eigenstate_profile() {
        let l = 2.0;
        let s = FieldSpec::BoxEigenstate {
            quantum_number: 1,
            box_length: l,
            mass: 1.0,
        };
        let grid = Grid::uniform(0.0, l, 33).unwrap();
        let prof = transverse_profile(&s, &grid, TimeWindow::new(0.0, 3.0).unwrap()).unwrap();
        for (x, v) in grid.points().iter().zip(&prof) {
            assert!((v - 2.0 / l * (PI * x / l).sin().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn fringe_spacings() {
        let w = 4.0 * PI; // wavelength 0.5
        let n = standing(1.0, w, w);
        assert!((fringe_spacing(&n).unwrap() - 0.25).abs() < 1e-15);

        let s45 = FieldSpec::ObliqueStanding {
            amplitude: 1.0,
            wavenumber: w,
            angular_frequency: w,
            incidence_angle: PI / 4.0,
            polarization: Polarization::S,
        };
        assert!((fringe_spacing(&s45).unwrap() - 0.25 * 2f64.sqrt()).abs() < 1e-14);

        let near_normal = FieldSpec::ObliqueStanding {
            amplitude: 1.0,
            wavenumber: w,
            angular_frequency: w,
            incidence_angle: 1e-9,
            polarization: Polarization::S,
        };
        assert!((fringe_spacing(&near_normal).unwrap() - 0.25).abs() < 1e-15);

        assert!(matches!(
            fringe_spacing(&oblique(PI / 4.0, Polarization::P)),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn fringe_spacing_matches_located_maxima() {
        // successive maxima of sin²(kz) located by a fine scan
        let k = 4.0 * PI;
        let s = standing(1.0, k, k);
        let win = TimeWindow::new(0.0, 0.5).unwrap();
        let n = 200_001;
        let grid = Grid::uniform(0.0, 1.0, n).unwrap();
        let prof = transverse_profile(&s, &grid, win).unwrap();
        let peaks: Vec<f64> = (1..n - 1)
            .filter(|&i| prof[i] > prof[i - 1] && prof[i] >= prof[i + 1])
            .map(|i| grid.points()[i])
            .collect();
        let spacing = (peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64;
        assert!((spacing - fringe_spacing(&s).unwrap()).abs() < 1e-5);
    }

    #[test]
    fn densities_integrate_to_one() {
        let g = FieldSpec::GaussianPacket {
            initial_width: 0.8,
            mean_wavenumber: 1.5,
            mass: 3.0,
        };
        for t in [0.0, 1.0, 10.0] {
            let centre = 1.5 / 3.0 * t;
            let est = quadrature::integrate(
                |x| instantaneous_intensity(&g, x, t).unwrap(),
                centre - 200.0,
                centre + 200.0,
                &[centre],
                64,
                Tolerance::relative(1e-13),
            )
            .unwrap();
            assert!((est.value - 1.0).abs() < 1e-9);
        }
        for q in [1, 2, 5] {
            let b = FieldSpec::BoxEigenstate {
                quantum_number: q,
                box_length: 3.0,
                mass: 1.0,
            };
            let est = quadrature::integrate(
                |x| instantaneous_intensity(&b, x, 0.0).unwrap(),
                0.0,
                3.0,
                &[],
                8,
                Tolerance::relative(1e-13),
            )
            .unwrap();
            assert!((est.value - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn gaussian_amplitude_solves_free_schrodinger() {
        // i ∂ψ/∂t = −(1/2m) ∂²ψ/∂x², central differences
        let (s0, k0, m) = (0.9, 1.7, 2.5);
        let g = FieldSpec::GaussianPacket {
            initial_width: s0,
            mean_wavenumber: k0,
            mass: m,
        };
        let h = 1e-4;
        for (x, t) in [(0.1, 0.0), (1.3, 0.8), (-0.7, 2.0)] {
            let psi = |x, t| g.psi(x, t).unwrap();
            let dt = (psi(x, t + h) - psi(x, t - h)) / (2.0 * h);
            let dxx = (psi(x + h, t) - 2.0 * psi(x, t) + psi(x - h, t)) / (h * h);
            let lhs = Complex64::i() * dt;
            let rhs = -dxx / (2.0 * m);
            assert!((lhs - rhs).norm() < 1e-5, "residual {}", (lhs - rhs).norm());
            let density = instantaneous_intensity(&g, x, t).unwrap();
            assert!((psi(x, t).norm_sqr() - density).abs() < 1e-13);
        }
    }

    #[test]
    fn gaussian_width_law() {
        let (s0, m) = (0.6, 4.0);
        let g = FieldSpec::GaussianPacket {
            initial_width: s0,
            mean_wavenumber: 2.0,
            mass: m,
        };
        let c0 = instantaneous_intensity(&g, 0.0, 0.0).unwrap() * s0;
        for t in [0.5, 3.0, 40.0] {
            let sigma = s0 * (1.0 + (t / (2.0 * m * s0 * s0)).powi(2)).sqrt();
            let c = instantaneous_intensity(&g, 2.0 / m * t, t).unwrap() * sigma;
            assert!((c - c0).abs() < 1e-10);
        }
    }

    #[test]
    fn superposition_of_box_states_beats() {
        let l = 1.0;
        let b = |q| FieldSpec::BoxEigenstate {
            quantum_number: q,
            box_length: l,
            mass: 1.0,
        };
        let w = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let s = FieldSpec::Superposition {
            terms: vec![
                SuperpositionTerm { weight: w, field: b(1) },
                SuperpositionTerm { weight: w, field: b(2) },
            ],
        };
        let x = 0.25;
        let d1 = instantaneous_intensity(&b(1), x, 0.0).unwrap();
        let d2 = instantaneous_intensity(&b(2), x, 0.0).unwrap();
        // energies differ by 3π²/2; the cross term oscillates at that rate
        let de = 3.0 * PI * PI / 2.0;
        for t in [0.0, 0.1, 0.33] {
            let cross = 2.0 * (d1 * d2).sqrt() * (de * t).cos();
            let want = 0.5 * (d1 + d2 + cross);
            assert!((instantaneous_intensity(&s, x, t).unwrap() - want).abs() < 1e-13);
        }
        // time average over a full beat period drops the cross term
        let m = mean_intensity(&s, x, TimeWindow::new(0.0, 2.0 * PI / de).unwrap()).unwrap();
        assert!((m - 0.5 * (d1 + d2)).abs() < 1e-8);
    }
}
