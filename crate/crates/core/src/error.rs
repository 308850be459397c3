use std::fmt;

use thiserror::Error;

/// Position of a rejected token inside a text input. Lines and columns are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{location}: {message}")]
    Parse { location: Location, message: String },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("no recognizable posture in trace")]
    NoRecognizablePosture,

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            location: Location { line, column },
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Error::Validation(message.into())
    }

    pub fn location(&self) -> Option<Location> {
        match self {
            Error::Parse { location, .. } => Some(*location),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
