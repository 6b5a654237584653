use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied an argument outside the operation's domain.
    #[error("invalid input: {0}")]
    Input(String),

    /// Requested problem size is beyond what the operation supports.
    #[error("resource limit: {0}")]
    Resource(String),

    /// Instance text could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Time integration lost accuracy (norm drift or step-size underflow).
    #[error("integration failure: {0}")]
    Integration(String),

    /// A reverse-trial evolution failed; carries the trial index.
    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    /// A sweep point failed; carries the total anneal time.
    #[error("T = {total_time}: {source}")]
    Sweep {
        total_time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// True for failures of the numerical machinery rather than of the caller.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Integration(_) => true,
            Error::Trial { source, .. } | Error::Sweep { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
