//! Error type shared across the crate.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    /// Shapes of two operands do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A count argument is out of the permitted range.
    #[error("size error: {0}")]
    Size(String),

    /// A scalar argument is out of the permitted range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input contains NaN or infinity where finite values are required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A backward pass was fed a cache that does not match its arguments.
    #[error("cache mismatch: {0}")]
    CacheMismatch(String),

    /// Loaded data violates a structural invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Schema version field is missing or unsupported.
    #[error("version error: {0}")]
    Version(String),

    /// The synthetic generator could not satisfy its separation constraints.
    #[error("generation error: {0}")]
    Generation(String),

    /// Inconsistent run configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Ablation variant id not recognized.
    #[error("unknown variant `{0}`, valid ids: {1}")]
    UnknownVariant(String, String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether this error reflects bad user input (CLI exit code 2)
    /// rather than a runtime fault (exit code 1).
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_)
                | Error::Size(_)
                | Error::Parameter(_)
                | Error::Validation(_)
                | Error::Version(_)
                | Error::Config(_)
                | Error::Generation(_)
                | Error::UnknownVariant(_, _)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
