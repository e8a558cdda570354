use std::path::PathBuf;

use thiserror::Error;

use crate::solver::BlowUpReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("data support radius {radius:.4} does not fit the periodic box (limit {limit:.4})")]
    SupportOverflow { radius: f64, limit: f64 },

    #[error("CFL violation: dt = {dt:.6e} exceeds admissible dt = {admissible:.6e}")]
    Cfl { dt: f64, admissible: f64 },

    #[error("solution blew up at t = {:.6} (last good t = {:.6})", .0.failed_t, .0.last_good_t)]
    BlowUp(Box<BlowUpReport>),

    #[error("{path}: malformed field file at byte offset {offset}: {reason}")]
    Format {
        path: PathBuf,
        offset: u64,
        reason: String,
    },

    #[error("{path}: malformed table: {reason}")]
    Table { path: PathBuf, reason: String },

    #[error("mismatched diagnostics input: {0}")]
    Mismatch(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
