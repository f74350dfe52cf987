//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Shape mismatch between tensors, naming the offending axes.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: String,
        actual: String,
    },

    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Binarization or component labeling found no foreground pixels.
    #[error("no foreground pixels found")]
    NoForeground,

    /// The masked region has no valid co-occurrence pair in any direction.
    #[error("no valid co-occurrence pair in any direction")]
    NoTexture,

    /// Dataset ingestion failure (missing image, bad patch coordinates).
    #[error("ingest error: {0}")]
    Ingest(String),

    /// Malformed input file, with the 1-based line number.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A split could not be produced (e.g. a class is too small).
    #[error("split error: {0}")]
    Split(String),

    /// Operation requires state that is absent (e.g. no training split).
    #[error("state error: {0}")]
    State(String),

    /// Training diverged; coordinates locate the first bad update.
    #[error("training error at epoch {epoch}, batch {batch}: {message}")]
    Training {
        epoch: usize,
        batch: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: impl ToString, actual: impl ToString) -> Self {
        Error::Dimension {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
