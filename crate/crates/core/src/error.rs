use std::path::PathBuf;

use crate::grid::CellCoord;

/// Errors produced by the mapping engine, the labeling pipeline and the
/// file formats.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("raster dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("depth must be positive and finite, got {0}")]
    InvalidDepth(f64),

    #[error("insufficient data around cell {0:?}")]
    InsufficientData(CellCoord),

    #[error("no evaluable pixels")]
    NoEvaluablePixels,

    #[error("{file}:{line}: {msg}")]
    Parse {
        file: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{}: {msg}", file.display())]
    Format { file: PathBuf, msg: String },

    #[error("{}: unsupported map file version {found:?}", file.display())]
    VersionMismatch { file: PathBuf, found: String },

    #[error("no frames found in {}", .0.display())]
    NoFrames(PathBuf),

    #[error("frame {frame}: {source}")]
    Frame {
        frame: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(file: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn in_frame(self, frame: usize) -> Self {
        Error::Frame {
            frame,
            source: Box::new(self),
        }
    }

    /// True for failures of the filesystem rather than of the data.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Frame { source, .. } => source.is_io(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
