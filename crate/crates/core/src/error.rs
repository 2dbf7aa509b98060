use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point lies outside the closed half-space (x_d = {0})")]
    OutsideHalfSpace(f64),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("expression parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("coefficient matrix is not symmetric at entry ({0}, {1})")]
    NonSymmetric(usize, usize),

    #[error("matrix is not symmetric positive definite (min eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("expected a constant coefficient, found an expression depending on (t, x)")]
    NonConstantCoefficient,

    #[error("empty sample set: {0}")]
    EmptySample(&'static str),

    #[error("function has no registered exact derivatives")]
    MissingDerivatives,

    #[error("monotonicity certificate failed at node {node}: {reason}")]
    Monotonicity { node: usize, reason: String },

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("target point {0:?} is outside the source grid (extrapolation refused)")]
    Extrapolation(Vec<f64>),

    #[error("sample point {0:?} is outside the barrier validity window")]
    OutsideValidityWindow(Vec<f64>),

    #[error("zero denominator: {0}")]
    ZeroDenominator(&'static str),

    #[error("grid file format error: {0}")]
    Format(String),

    #[error("grid file truncated: header advertises {expected} values, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
