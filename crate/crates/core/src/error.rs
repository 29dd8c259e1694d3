use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("time {t} outside drive support [{start}, {end}]")]
    OutsideSupport { t: f64, start: f64, end: f64 },
    #[error("drive is discontinuous at t = {t} (jump {jump:e})")]
    Discontinuous { t: f64, jump: f64 },
    #[error("degenerate spectrum (gap {gap:e}); eigenvector phase is undefined")]
    DegenerateSpectrum { gap: f64 },
    #[error("tangential anticrossing passage at t = {t}; the impulse model does not apply")]
    TangentialCrossing { t: f64 },
    #[error("integrator step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("integrator exceeded {steps} steps at t = {t}")]
    TooManySteps { t: f64, steps: usize },
    #[error("quadrature did not converge on [{a}, {b}] (error estimate {err:e})")]
    Quadrature { a: f64, b: f64, err: f64 },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("no convergence: {reason} (best residual {residual:e})")]
    NoConvergence { reason: String, residual: f64 },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
