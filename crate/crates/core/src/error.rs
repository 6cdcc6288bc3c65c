use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("PGM maxval {0} is above 255")]
    MaxvalUnsupported(usize),
    #[error("truncated PGM payload: expected {expected} samples, found {actual}")]
    TruncatedPayload { expected: usize, actual: usize },
    #[error("raster has no pixels")]
    EmptyRaster,
    #[error("raster data has {actual} elements, expected {expected}")]
    DataLength { expected: usize, actual: usize },
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("histogram has a single occupied bin; no threshold separates two classes")]
    DegenerateHistogram,
    #[error("marker label {label} at ({x}, {y}) lies outside the mask")]
    MarkerOutsideMask { label: u32, x: usize, y: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("sample {0:?} has no accepted regions")]
    NoAcceptedRegions(String),
    #[error("no manual count for image {image:?} of sample {sample:?}")]
    MissingManualCount { sample: String, image: String },
    #[error("image ids do not match: {0}")]
    MismatchedIds(String),
    #[error("placed only {placed} of {requested} tracks")]
    PlacementInfeasible { placed: usize, requested: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Attaches the file the error came from.
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            e @ (Error::Io { .. } | Error::InFile { .. }) => e,
            e => Error::InFile {
                path: path.to_path_buf(),
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
