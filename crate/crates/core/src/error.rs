//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// Errors fall into two broad classes that callers (notably the CLI) treat
/// differently: problems with the input itself (`Io`, `Csv`, `Parse`,
/// `Validation`) and data that contradict the identifying assumptions
/// (`Assumption`).
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    /// A malformed value in an input file, located by row and field.
    #[error("row {row}, field `{field}`: {message}")]
    Parse {
        /// 1-based data row (excluding the header).
        row: usize,
        field: String,
        message: String,
    },

    /// Structurally valid input that violates a domain invariant.
    #[error("{0}")]
    Validation(String),

    /// Data inconsistent with the identifying assumptions of the analysis.
    #[error("{0}")]
    Assumption(String),
}

impl Error {
    pub(crate) fn parse(row: usize, field: &str, message: impl Into<String>) -> Self {
        Error::Parse {
            row,
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn validation(message: impl Into<String>) -> Self {
        Error::Validation(message.into())
    }

    pub(crate) fn assumption(message: impl Into<String>) -> Self {
        Error::Assumption(message.into())
    }

    /// True when the error signals an assumption violation rather than bad input.
    pub fn is_assumption_violation(&self) -> bool {
        matches!(self, Error::Assumption(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
