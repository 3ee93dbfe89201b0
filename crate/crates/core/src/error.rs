use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid ensemble: {0}")]
    InvalidSpec(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("value left double range")]
    Overflow,
    #[error("non-finite result")]
    NonFinite,
    #[error("root finder did not converge after {iterations} iterations (worst relative residual {worst_residual:e})")]
    NoConvergence { iterations: usize, worst_residual: f64 },
    #[error("expected {expected} zeros, found {found}")]
    ZeroCount { expected: usize, found: usize },
    #[error("winding number count failed after {attempts} cell offsets")]
    WindingMismatch { attempts: usize },
    #[error("value covariance is ill-conditioned (cond {cond:e}); separate the points further")]
    IllConditioned { cond: f64 },
    #[error("points {0} and {1} coincide")]
    CoincidentPoints(usize, usize),
    #[error("matrix of order {0} exceeds the supported size")]
    TooLarge(usize),
    #[error("quadrature did not reach the requested tolerance (last relative change {0:e})")]
    Quadrature(f64),
    #[error("empty input")]
    EmptyInput,
    #[error("sample mean is zero")]
    ZeroMean,
    #[error("expected bin count {0} is below 5")]
    SparseBins(f64),
}

pub type Result<T> = core::result::Result<T, Error>;
