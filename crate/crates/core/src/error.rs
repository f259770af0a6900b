use crate::scheme::SchemeError;

/// Errors raised by ratio generation, interval search, oracles and problems.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("dilation factor must be positive and different from 1, got {0}")]
    InvalidAlpha(f64),
    #[error("testing ratio has a zero remainder constant")]
    DegenerateRatio,
    #[error("no integer dilation in 2..=16 yields an optimal ratio above {0}")]
    NoValidAlpha(f64),
    #[error("ratio bounds must satisfy 1 < r_l < r_u - 2, got ({r_l}, {r_u})")]
    InvalidBounds { r_l: f64, r_u: f64 },
    #[error("invalid search configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("noise level must be positive")]
    ZeroNoiseLevel,
    #[error("function returned a non-finite value at {0}")]
    NonFiniteFunctionValue(f64),
    #[error("affine scale must be nonzero")]
    ZeroScale,
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("direction has zero norm")]
    ZeroDirection,
    #[error("unknown problem {0:?}")]
    UnknownName(alloc::string::String),
    #[error("problem {0:?} has no analytic derivatives")]
    MissingAnalyticDerivatives(alloc::string::String),
}
