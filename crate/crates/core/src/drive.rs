//! Space-time intensity functions that feed the kinetics and the sampler.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::wavefield::{instantaneous_intensity, FieldSpec};

/// A non-negative intensity `I(t, r)`.
///
/// `breakpoints` lists times in `(t0, t1)` where the intensity jumps; the
/// integrator lands a step on each one and evaluates the step end as a left
/// limit, and quadrature splits there.
pub trait Intensity: Sync {
    fn value(&self, t: f64, r: f64) -> f64;

    fn breakpoints(&self, _t0: f64, _t1: f64) -> Vec<f64> {
        Vec::new()
    }

    /// Known upper bound over all `(t, r)`, if one is available analytically.
    fn supremum(&self) -> Option<f64> {
        None
    }
}

impl<F> Intensity for F
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    fn value(&self, t: f64, r: f64) -> f64 {
        self(t, r)
    }
}

/// `scale · intensity(field)`. Positions outside the field domain yield NaN,
/// which every consumer rejects.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDrive {
    spec: FieldSpec,
    scale: f64,
}

impl FieldDrive {
    pub fn new(spec: FieldSpec, scale: f64) -> Result<Self> {
        spec.validate()?;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(crate::Error::invalid(format!("drive scale must be positive, got {scale}")));
        }
        Ok(Self { spec, scale })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl Intensity for FieldDrive {
    fn value(&self, t: f64, r: f64) -> f64 {
        instantaneous_intensity(&self.spec, r, t).map_or(f64::NAN, |v| self.scale * v)
    }

    fn supremum(&self) -> Option<f64> {
        Some(self.scale * self.spec.supremum())
    }
}

/// Spatially uniform square wave: `high` on `[2j·h, (2j+1)·h)`, `low` on the
/// other half periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareWave {
    pub high: f64,
    pub low: f64,
    pub half_period: f64,
}

impl SquareWave {
    /// Index of the half period containing `t`, consistent with the switch
    /// times `j as f64 * half_period` reported by `breakpoints`.
    pub fn phase_index(&self, t: f64) -> i64 {
        let h = self.half_period;
        let mut n = (t / h).floor();
        if (n + 1.0) * h <= t {
            n += 1.0;
        } else if n * h > t {
            n -= 1.0;
        }
        n as i64
    }
}

impl Intensity for SquareWave {
    fn value(&self, t: f64, _r: f64) -> f64 {
        if self.phase_index(t).rem_euclid(2) == 0 {
            self.high
        } else {
            self.low
        }
    }

    fn breakpoints(&self, t0: f64, t1: f64) -> Vec<f64> {
        let h = self.half_period;
        let first = (t0 / h).floor() as i64;
        let last = (t1 / h).ceil() as i64;
        (first..=last)
            .map(|j| j as f64 * h)
            .filter(|&b| b > t0 && b < t1)
            .collect()
    }

    fn supremum(&self) -> Option<f64> {
        Some(self.high.max(self.low))
    }
}

/// Spatially uniform `mean + amplitude·cos(Ωt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sinusoid {
    pub mean: f64,
    pub amplitude: f64,
    pub angular_frequency: f64,
}

impl Intensity for Sinusoid {
    fn value(&self, t: f64, _r: f64) -> f64 {
        self.mean + self.amplitude * (self.angular_frequency * t).cos()
    }

    fn supremum(&self) -> Option<f64> {
        Some(self.mean + self.amplitude.abs())
    }
}

/// `factor · inner`, used to turn an intensity into a creation rate.
#[derive(Debug, Clone, Copy)]
pub struct Scaled<'a, I: ?Sized> {
    pub inner: &'a I,
    pub factor: f64,
}

impl<I: Intensity + ?Sized> Intensity for Scaled<'_, I> {
    fn value(&self, t: f64, r: f64) -> f64 {
        self.factor * self.inner.value(t, r)
    }

    fn breakpoints(&self, t0: f64, t1: f64) -> Vec<f64> {
        self.inner.breakpoints(t0, t1)
    }

    fn supremum(&self) -> Option<f64> {
        self.inner.supremum().map(|s| self.factor * s)
    }
}

/// Serializable choice of intensity for scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Drive {
    Field {
        field: FieldSpec,
        #[serde(default = "unit")]
        scale: f64,
    },
    SquareWave(SquareWave),
    Sinusoid(Sinusoid),
}

fn unit() -> f64 {
    1.0
}

impl Drive {
    pub fn validate(&self) -> Result<()> {
        match self {
            Drive::Field { field, scale } => FieldDrive::new(field.clone(), *scale).map(|_| ()),
            Drive::SquareWave(sq) => {
                if !(sq.half_period.is_finite() && sq.half_period > 0.0) {
                    return Err(crate::Error::invalid("square wave half_period must be positive"));
                }
                if !(sq.high >= 0.0 && sq.low >= 0.0 && sq.high.is_finite() && sq.low.is_finite()) {
                    return Err(crate::Error::invalid("square wave levels must be finite and non-negative"));
                }
                Ok(())
            }
            Drive::Sinusoid(s) => {
                if !(s.mean.is_finite() && s.amplitude.is_finite() && s.angular_frequency.is_finite()) {
                    return Err(crate::Error::invalid("sinusoid parameters must be finite"));
                }
                if s.amplitude.abs() > s.mean || s.angular_frequency <= 0.0 {
                    return Err(crate::Error::invalid(
                        "sinusoid needs |amplitude| ≤ mean and a positive angular frequency",
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn field(&self) -> Option<&FieldSpec> {
        match self {
            Drive::Field { field, .. } => Some(field),
            _ => None,
        }
    }

    pub fn scale(&self) -> f64 {
        match self {
            Drive::Field { scale, .. } => *scale,
            _ => 1.0,
        }
    }
}

impl Intensity for Drive {
    fn value(&self, t: f64, r: f64) -> f64 {
        match self {
            Drive::Field { field, scale } => instantaneous_intensity(field, r, t).map_or(f64::NAN, |v| scale * v),
            Drive::SquareWave(s) => s.value(t, r),
            Drive::Sinusoid(s) => s.value(t, r),
        }
    }

    fn breakpoints(&self, t0: f64, t1: f64) -> Vec<f64> {
        match self {
            Drive::SquareWave(s) => s.breakpoints(t0, t1),
            _ => Vec::new(),
        }
    }

    fn supremum(&self) -> Option<f64> {
        match self {
            Drive::Field { field, scale } => Some(scale * field.supremum()),
            Drive::SquareWave(s) => s.supremum(),
            Drive::Sinusoid(s) => s.supremum(),
        }
    }
}
