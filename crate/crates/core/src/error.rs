//! Error taxonomy shared by every module.
//!
//! The variants map onto how the CLI reports failures: anything here other
//! than [`LabError::AcceptanceFailure`] is a usage/configuration/runtime
//! problem (exit code 2); `AcceptanceFailure` marks a run whose built-in
//! statistical assertion failed (exit code 1).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    /// Invalid parameter values or malformed configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Shape mismatches: incompatible matrix/vector dimensions.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// The requested computation exceeds an enforced size budget.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// An operation-specific precondition on the inputs is violated.
    #[error("precondition error: {0}")]
    Precondition(String),

    /// The model is outside what the estimator is defined for.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// No admissible data was left to estimate from.
    #[error("undefined estimate: {0}")]
    UndefinedEstimate(String),

    /// A run-level statistical assertion (e.g. monotonicity of the phase
    /// curve) did not hold.
    #[error("acceptance assertion failed: {0}")]
    AcceptanceFailure(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl LabError {
    /// Process exit code the CLI uses for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::AcceptanceFailure(_) => 1,
            _ => 2,
        }
    }
}
