use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the pipeline.
///
/// Variants are grouped by the stage that produces them. `Validation`-class
/// errors map to CLI exit code 1, everything else to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("cell ({row}, {col}) is outside the grid index range")]
    CellIndex { row: usize, col: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error("{count} malformed row(s); first at line {line}: {message}")]
    Diagnostics { count: usize, line: u64, message: String },

    #[error("county ids without a shape: {0:?}")]
    UnresolvedCounties(Vec<String>),

    #[error("duplicate key: {0}")]
    DuplicateKey(String),

    #[error("no county coverage for {} cell(s), first {:?}", .0.len(), .0.first())]
    NoCoverage(Vec<(usize, usize)>),

    #[error("no data for {predictor} in year {year}")]
    MissingYear { predictor: String, year: i32 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("training diverged at epoch {epoch}: {detail}")]
    Divergence { epoch: usize, detail: String },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// True for errors caused by bad user input rather than a failed run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidRegion(_)
                | Error::InvalidPolygon(_)
                | Error::Format(_)
                | Error::Diagnostics { .. }
                | Error::UnresolvedCounties(_)
                | Error::DuplicateKey(_)
                | Error::NoCoverage(_)
                | Error::MissingYear { .. }
                | Error::Config(_)
                | Error::InvalidScenario(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
