use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header: {0}")]
    Header(String),
    #[error("non-3D image (NDims = {0})")]
    NotThreeD(usize),
    #[error("unsupported element type {0}")]
    UnsupportedElementType(String),
    #[error("data size mismatch: expected {expected} bytes, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("invalid volume: {0}")]
    InvalidVolume(String),
    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimsMismatch([usize; 3], [usize; 3]),
    #[error("malformed guidance file, line {line}: {reason}")]
    Guidance { line: usize, reason: String },
    #[error("invalid synthetic configuration: {0}")]
    SyntheticConfig(String),
    #[error("grid resolution must be at least 2 along every axis, got {0:?}")]
    InvalidResolution([usize; 3]),
    #[error("point index {index} out of range ({count} points)")]
    PointIndex { index: usize, count: usize },
    #[error("degenerate tetrahedron")]
    DegenerateTet,
    #[error("solution is infeasible (folded grid)")]
    Infeasible,
    #[error("point {0:?} is not covered by any tetrahedron")]
    Uncovered([f64; 3]),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("incompatible schedule: {0}")]
    Schedule(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
