use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid optical system: {0}")]
    InvalidSystem(String),

    #[error("no lens satisfies the design constraints: {0}")]
    Infeasible(String),

    #[error("system is afocal (zero paraxial power)")]
    Afocal,

    #[error("ray does not propagate toward the plane (direction z = {0:e})")]
    NotForward(f64),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("malformed header at byte {offset}: {msg}")]
    BadHeader { offset: u64, msg: String },

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u16, expected: u16 },

    #[error("truncated record {index} at byte {offset}")]
    Truncated { index: u64, offset: u64 },

    #[error("cell {cell} produced no surviving rays")]
    EmptyCell { cell: u32 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("record {index}: direction ({dx}, {dy}) is not a forward unit direction")]
    BadDirection { index: usize, dx: f64, dy: f64 },

    #[error("{0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
