use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point ({t1}, {t2}) lies outside [0, {horizon}]^2")]
    PointOutOfDomain { t1: f64, t2: f64, horizon: f64 },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions: \
         estimate {estimate:e}, error bound {error_bound:e}"
    )]
    NoConvergence {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    #[error(
        "matrix of order {order} is not positive definite after jitter {max_jitter:e} \
         (minimum pivot estimate {min_pivot:e})"
    )]
    NotPositiveDefinite {
        order: usize,
        max_jitter: f64,
        min_pivot: f64,
    },

    #[error("grid too large: {points} points exceed the cap of {cap}")]
    GridTooLarge { points: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
