use thiserror::Error;

/// Errors raised across the solver, model and analysis layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("equality system is inconsistent: residual {residual:.3e} above tolerance {tolerance:.3e}")]
    InfeasibleEquality { residual: f64, tolerance: f64 },

    #[error("matrix is near-singular: eigenvalue {eigenvalue:.3e} below tolerance {tolerance:.3e}; remove linearly dependent rows")]
    NearSingular { eigenvalue: f64, tolerance: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("infeasible bounds on {name}: lower {lower} > upper {upper}")]
    InfeasibleBounds { name: String, lower: f64, upper: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    #[error("iterate diverged (non-finite value) at step {step}")]
    Diverged { step: usize },

    #[error("unsupported metric: {0}")]
    UnsupportedMetric(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
