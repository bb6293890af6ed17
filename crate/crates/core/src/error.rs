//! Crate-wide error type.

use std::fmt;

#[derive(Debug)]
pub enum Error {
    /// Invalid argument to a numeric routine (non-finite input, value out of
    /// the supported domain).
    Domain(String),
    /// Scenario or geometry configuration rejected before any computation.
    Config(String),
    /// Matrix inversion refused: singular or condition estimate too large.
    /// Usually signals coincident user locations or duplicate codewords.
    Singular(String),
    /// An iterative solver failed to converge within its iteration cap.
    NoConvergence(String),
    /// Codebook file could not be parsed; carries the offending line number.
    Parse { line: usize, message: String },
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Config(m) => write!(f, "config error: {m}"),
            Error::Singular(m) => write!(f, "singular matrix: {m}"),
            Error::NoConvergence(m) => write!(f, "no convergence: {m}"),
            Error::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
