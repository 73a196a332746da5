use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{origin}: {message}")]
    Config { origin: String, message: String },
    #[error("{origin}:{line}: {message}")]
    Input { origin: String, line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario `{scenario}` (sweep point {point}): {source}")]
    Physics {
        scenario: String,
        point: usize,
        #[source]
        source: phaselab::Error,
    },
    #[error("writing results: {0}")]
    Emit(String),
}

impl CliError {
    pub fn config(origin: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            origin: origin.into(),
            message: message.into(),
        }
    }

    pub fn input(origin: &str, line: usize, message: String) -> Self {
        CliError::Input {
            origin: origin.to_string(),
            line,
            message,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
