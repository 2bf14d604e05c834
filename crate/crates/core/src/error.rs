use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty probability vector")]
    EmptyInput,

    #[error("probabilities do not sum to 1 (sum = {0})")]
    NotNormalized(f64),

    #[error("invalid probability mass {0} (must be finite and non-negative)")]
    InvalidMass(f64),

    #[error("joint pmf rows have inconsistent lengths")]
    RaggedMatrix,

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("distortion level must be non-negative (got {0})")]
    NegativeDistortion(f64),

    #[error("size budget exceeded: {0}")]
    TooLarge(String),

    #[error("alphabet of size {size} is too large for the brute-force oracle (max {max})")]
    TooLargeForOracle { size: usize, max: usize },

    #[error("allocation solver did not converge: {0}")]
    OptimizerNotConverged(String),

    #[error("sandwich violated: {0}")]
    SandwichViolation(String),

    #[error("distortion {d} outside the admissible range 0 <= D < H = {h} bits")]
    DistortionAboveEntropy { d: f64, h: f64 },

    #[error("argument {0} outside (0, 1)")]
    OutOfDomain(f64),

    #[error("input error: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::BadParameter(format!("eps must lie in [0, 1) (got {eps})")));
    }
    Ok(())
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::BadParameter(format!("rho must be positive (got {rho})")));
    }
    Ok(())
}
