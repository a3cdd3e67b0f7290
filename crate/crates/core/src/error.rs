//! Error type shared by every module in the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Underlying I/O failure (missing file, unwritable directory, ...).
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file could be read but not understood.
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Two grids that must share a geometry do not; names the first
    /// differing field.
    #[error("grid geometry mismatch: {field}")]
    Misaligned { field: &'static str },

    /// A cell coordinate outside the grid.
    #[error("cell out of bounds: row {row}, col {col} (grid is {nrows}x{ncols})")]
    OutOfBounds {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    /// Latitude outside [-90, 90] in geographic mode.
    #[error("invalid latitude {latitude}: must be in [-90, 90]")]
    InvalidLatitude { latitude: f64 },

    /// A partial rurality map was requested for an empty city list.
    #[error("no city meets threshold")]
    NoQualifyingCities,

    /// A rurality map threshold filters out every city in the registry.
    #[error("no city meets threshold p={0}")]
    NoCityMeetsThreshold(u64),

    /// A ratio or curve was requested over zero eligible cells.
    #[error("empty domain: {0}")]
    EmptyDomain(String),

    /// The concentration curve is undefined without any covered cell.
    #[error("CCI undefined: no coverage")]
    NoCoverage,

    /// Any other violated invariant or precondition.
    #[error("{0}")]
    Validation(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// True for plain I/O failures, false for every validation-style error.
    /// Callers that need an exit code can map I/O to 1 and the rest to 2.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
