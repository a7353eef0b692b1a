use std::fmt;
use std::path::Path;

use lsdr_core::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;
pub const EXIT_FALLBACK: i32 = 5;

/// A failure reported as one `error[category]: message` line.
#[derive(Debug)]
pub struct CliError {
    pub category: &'static str,
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            category: "usage",
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn fallback(message: impl Into<String>) -> Self {
        Self {
            category: "fallback",
            code: EXIT_FALLBACK,
            message: message.into(),
        }
    }

    /// Wraps an error raised while handling `path`.
    pub fn at(path: &Path, err: Error) -> Self {
        let mut e = CliError::from(err);
        e.message = format!("{}: {}", path.display(), e.message);
        e
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let category = err.category();
        let code = match category {
            "usage" => EXIT_USAGE,
            "input" => EXIT_INPUT,
            _ => EXIT_NUMERICAL,
        };
        Self {
            category,
            code,
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err).into()
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        Error::Json(err).into()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = self.message.replace('\n', " ");
        write!(f, "error[{}]: {}", self.category, msg.trim())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
