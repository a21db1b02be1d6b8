use std::path::PathBuf;

use crate::volume::Dims;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header {}: {reason}", path.display())]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("payload {} holds {actual} bytes, header dims require {expected}", path.display())]
    SizeMismatch {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("non-finite sample {value} at flat index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: Dims, right: Dims },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("index {index} out of range for {axis} axis of extent {extent}")]
    IndexOutOfRange {
        axis: &'static str,
        index: usize,
        extent: usize,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
