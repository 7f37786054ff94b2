use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported dimension {0}; only d = 2 and d = 3 are implemented")]
    Dimension(usize),
    #[error("exponent {0} is below 1")]
    Exponent(f64),
    #[error("non-finite evaluation point")]
    NonFinitePoint,
    #[error("point lies on the singular hyperplane s = 0 of the inversion")]
    SingularPoint,
    #[error("affine map is singular (|det| = {0:e})")]
    SingularMap(f64),
    #[error("field is identically zero")]
    ZeroField,
    #[error("input takes negative values")]
    NegativeInput,
    #[error("degenerate configuration (relative volume {0:e})")]
    Degenerate(f64),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("iteration diverged: {0}")]
    Divergence(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
