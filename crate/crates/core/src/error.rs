use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid population: {0}")]
    InvalidPopulation(String),

    #[error("cannot pair fewer than two items (got {0})")]
    EmptyPairing(usize),

    #[error("record references item {item} outside a population of {n_items}")]
    Integrity { item: usize, n_items: usize },

    #[error("configuration error{}: {message}", location(.key, .line))]
    Config {
        key: Option<String>,
        line: Option<usize>,
        message: String,
    },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

fn location(key: &Option<String>, line: &Option<usize>) -> String {
    match (key, line) {
        (Some(k), Some(l)) => format!(" at line {l} (key `{k}`)"),
        (Some(k), None) => format!(" (key `{k}`)"),
        (None, Some(l)) => format!(" at line {l}"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub fn config(message: impl Into<String>) -> Self {
        Error::Config {
            key: None,
            line: None,
            message: message.into(),
        }
    }

    pub fn config_key(key: &str, line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Config {
            key: Some(key.to_string()),
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 1,
            Error::Io { .. } => 2,
            _ => 3,
        }
    }
}
