use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed volume file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("unsupported datatype code {0}")]
    UnsupportedDatatype(i16),

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: [usize; 3],
        found: [usize; 3],
    },

    #[error("payload holds {found} voxels but header declares {expected}")]
    PayloadLength { expected: usize, found: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("trilinear interpolation requested for {0} data; use nearest")]
    TrilinearOnLabels(&'static str),

    #[error("mask is not binary: found value {0}")]
    NotBinary(f32),

    #[error("EmptyMask: mask has no foreground voxel")]
    EmptyMask,

    #[error("EmptySurface: target surface list is empty")]
    EmptySurface,

    #[error("component has no voxels")]
    EmptyComponent,

    #[error("bounding box {lo:?}..={hi:?} exceeds volume dims {dims:?}")]
    BoxOutOfRange {
        lo: [usize; 3],
        hi: [usize; 3],
        dims: [usize; 3],
    },

    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
