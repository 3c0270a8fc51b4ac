//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the segmentation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Grid dimensions do not satisfy an operation's requirements.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// An argument is out of range or otherwise invalid.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A mask is all-true or all-false where a mixed mask is required.
    #[error("degenerate mask: {0}")]
    DegenerateMask(String),

    /// A model-quality diagnostic cannot be computed.
    #[error("diagnostic error: {0}")]
    Diagnostic(String),

    /// The training loop cannot proceed.
    #[error("training error: {0}")]
    Training(String),

    /// A file does not conform to one of the toolkit formats.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
