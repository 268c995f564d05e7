use std::fmt;
use std::io;

/// Crate-wide error type.
#[derive(Debug)]
pub enum Error {
    /// Invalid configuration: empty ranges, zero sizes, bad thresholds.
    Config(String),
    /// Input outside the mathematical domain of an operation.
    Domain(String),
    /// Malformed input data, with source location.
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },
    /// Training produced a non-finite gradient or loss.
    Training(String),
    /// A report or data file does not match the expected schema.
    Schema(String),
    /// Underlying I/O failure.
    Io(io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Parse {
                source_name,
                line,
                message,
            } => write!(f, "parse error in {source_name}, line {line}: {message}"),
            Error::Training(msg) => write!(f, "training error: {msg}"),
            Error::Schema(msg) => write!(f, "schema error: {msg}"),
            Error::Io(err) => write!(f, "i/o error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(err: io::Error) -> Self {
        Error::Io(err)
    }
}
