use thiserror::Error;

/// Failures raised by the numeric kernel and the construction pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("argument must be non-zero")]
    ZeroArgument,
    #[error("argument must be positive, got {0}")]
    NonPositiveArgument(String),
    #[error("argument too small: {0}")]
    ArgumentTooSmall(String),
    #[error("denominator is not strictly positive: {0}")]
    NonPositiveDenominator(String),
    #[error("interval contains zero; cannot divide")]
    DivisionByInterval,
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),
    #[error("integral diverges: step function is positive arbitrarily close to 0")]
    DivergentIntegral,
    #[error("symmetry violation: {0}")]
    SymmetryViolation(String),
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("no sign change of the saddle-point polynomial on {0}")]
    NoSignChange(String),
    #[error("maximization did not converge after {0} iterations")]
    NonConvergence(usize),
    #[error("sign precondition alpha < 0 < beta fails: {0}")]
    SignPrecondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
