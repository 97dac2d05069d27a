use thiserror::Error;

/// Errors raised by the estimation lab.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("noise level {0} violates the standing condition 0 < ε ≤ e^-1")]
    EpsilonOutOfRange(f64),

    #[error("kernel certification failed for `{name}`: {reason}")]
    KernelCertification { name: String, reason: String },

    #[error("link certification failed: {0}")]
    LinkCertification(String),

    #[error(
        "oracle bandwidth set is empty at y = {y}; it is guaranteed nonempty only when \
         ε ≤ exp(-(2M‖K‖₁/‖K‖∞)²)"
    )]
    EmptyOracleSet { y: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate sweep: {0}")]
    DegenerateSweep(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid(msg: impl Into<String>) -> LabError {
    LabError::InvalidParameter(msg.into())
}
