//! Error type shared across the crate.

use std::fmt;

/// Errors produced by the library and the command-line surface.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument or parameter lies outside the mathematical domain of an
    /// operation (non-positive scale, probability outside (0,1), ...).
    Domain(String),
    /// Dataset validation failure; `row` is the 0-based data-row index when
    /// the failure is attributable to a single row.
    Data { row: Option<usize>, message: String },
    /// Configuration file or CLI argument problem.
    Config(String),
    /// The sampler could not produce draws (all-divergent warm-up,
    /// non-finite target at every initialization attempt, ...).
    Sampler(String),
    /// File-system problem while reading inputs or emitting outputs.
    Io(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn data(row: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Data {
            row,
            message: msg.into(),
        }
    }

    /// Process exit code for the CLI: 1 for validation problems, 2 for
    /// sampler failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Sampler(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Data { row: Some(r), message } => write!(f, "data error at row {r}: {message}"),
            Error::Data { row: None, message } => write!(f, "data error: {message}"),
            Error::Config(m) => write!(f, "config error: {m}"),
            Error::Sampler(m) => write!(f, "sampler error: {m}"),
            Error::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
