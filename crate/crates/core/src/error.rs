use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of a physical formula.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("ensemble generation failed: {0}")]
    Generation(String),

    #[error("two atoms coincide at index {0} and {1}")]
    CoincidentAtoms(usize, usize),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{failed} of {total} realizations failed (first: #{first_index}: {first_reason})")]
    TooManyFailures {
        failed: usize,
        total: usize,
        first_index: usize,
        first_reason: String,
    },

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
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
}
