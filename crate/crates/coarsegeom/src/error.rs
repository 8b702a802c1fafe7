use thiserror::Error;

/// Crate-wide error type. Every failure mode maps to a stable process exit
/// code so scripted pipelines can branch on the kind of failure.
#[derive(Debug, Error)]
pub enum Error {
    /// Inputs violate a documented precondition (bad weights, non-metric
    /// matrix, values outside the admissible band, ...).
    #[error("validation: {0}")]
    Validation(String),
    /// The request is well-formed but outside the supported class
    /// (unsupported presentation, unsupported mode for an operation, ...).
    #[error("capability: {0}")]
    Capability(String),
    /// The request would exceed a configured size budget.
    #[error("budget: {0}")]
    Budget(String),
    /// An internal invariant that should hold by construction was observed
    /// broken, or an `--audit` gate failed.
    #[error("invariant breach: {0}")]
    Invariant(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("format: {0}")]
    Format(String),
}

impl Error {
    /// Process exit code contract: 0 ok, 2 validation, 3 capability,
    /// 4 budget, 5 invariant breach. I/O and format problems count as
    /// validation for exit purposes.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Io(_) | Error::Format(_) => 2,
            Error::Capability(_) => 3,
            Error::Budget(_) => 4,
            Error::Invariant(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

pub(crate) fn capability(msg: impl Into<String>) -> Error {
    Error::Capability(msg.into())
}

pub(crate) fn budget(msg: impl Into<String>) -> Error {
    Error::Budget(msg.into())
}

pub(crate) fn invariant(msg: impl Into<String>) -> Error {
    Error::Invariant(msg.into())
}

pub(crate) fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}
