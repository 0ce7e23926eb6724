use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("no records: {0}")]
    EmptyInput(String),

    /// A value failed validation. `line` is 1-based when the failure is tied to
    /// an input line.
    #[error("{}", match .line { Some(l) => format!("line {l}: {message}"), None => message.clone() })]
    Validation {
        line: Option<usize>,
        message: String,
    },

    #[error("{metric} is undefined: {reason}")]
    UndefinedMetric {
        metric: &'static str,
        reason: &'static str,
    },

    #[error("node id {id} out of range for graph with {len} nodes")]
    OutOfBounds { id: usize, len: usize },

    #[error("stratification failed: {0}")]
    Stratification(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Validation {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn undefined(metric: &'static str, reason: &'static str) -> Self {
        Error::UndefinedMetric { metric, reason }
    }
}
