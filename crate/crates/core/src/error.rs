use nalgebra::Complex;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("gap not simple: {0}")]
    GapNotSimple(String),
    #[error("isolating circle failure: (1-rho)^N = {lhs:e} <= tau = {tau:e}")]
    IsolatingCircleFailure { lhs: f64, tau: f64 },
    #[error("invalid hypothesis constants: {0}")]
    InvalidHypothesis(String),
    #[error("eigenvalue collision at mu = {mu} (competing eigenvalue {other})")]
    EigenvalueCollision {
        mu: Complex<f64>,
        other: Complex<f64>,
    },
    #[error("contour too large: {0}")]
    ContourTooLarge(String),
    #[error("numeric overflow: {0}")]
    NumericOverflow(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("validation failed: {0}")]
    Validation(String),
}

impl Error {
    /// Process exit code used by the CLI: 1 for bad input, 3 for numeric trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidMatrix(_)
            | Error::InvalidInput(_)
            | Error::DimensionMismatch(_)
            | Error::GapNotSimple(_)
            | Error::InvalidHypothesis(_)
            | Error::Validation(_) => 1,
            Error::IsolatingCircleFailure { .. }
            | Error::EigenvalueCollision { .. }
            | Error::ContourTooLarge(_)
            | Error::NumericOverflow(_)
            | Error::SolverFailure(_) => 3,
        }
    }
}
