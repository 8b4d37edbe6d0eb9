use thiserror::Error;

/// Errors raised by the field, kinetics, point-process and estimator layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid field spec: {0}")]
    InvalidSpec(String),

    #[error("step size {dt} exceeds the relaxation bound {max} (tau / 20)")]
    StepSize { dt: f64, max: f64 },

    #[error("quadrature did not converge: error estimate {residual:e} above tolerance {tolerance:e} after {intervals} subintervals")]
    Quadrature {
        residual: f64,
        tolerance: f64,
        intervals: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("rate {rate} at (t = {t}, r = {r}) exceeds the thinning bound {bound}; supply a larger bound")]
    RateBound { rate: f64, bound: f64, t: f64, r: f64 },

    #[error("accounting error: {0}")]
    Accounting(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidSpec(msg.into())
    }

    /// Strips any pipeline-stage annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
