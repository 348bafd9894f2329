//! Error type shared by the harness: wraps core, I/O, and format errors and
//! carries plain messages for configuration and data problems.

use std::fmt;

/// Anything that can go wrong while loading data, running experiments, or
/// writing reports.
#[derive(Debug)]
pub enum HarnessError {
    Core(sets_clustering::Error),
    Io(std::io::Error),
    Csv(csv::Error),
    Json(serde_json::Error),
    Invalid(String),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Core(e) => write!(f, "{e}"),
            HarnessError::Io(e) => write!(f, "io error: {e}"),
            HarnessError::Csv(e) => write!(f, "csv error: {e}"),
            HarnessError::Json(e) => write!(f, "json error: {e}"),
            HarnessError::Invalid(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for HarnessError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            HarnessError::Core(e) => Some(e),
            HarnessError::Io(e) => Some(e),
            HarnessError::Csv(e) => Some(e),
            HarnessError::Json(e) => Some(e),
            HarnessError::Invalid(_) => None,
        }
    }
}

impl From<sets_clustering::Error> for HarnessError {
    fn from(e: sets_clustering::Error) -> Self {
        HarnessError::Core(e)
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e)
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Csv(e)
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Json(e)
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
