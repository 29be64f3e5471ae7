use std::fmt;

/// Errors produced by the toolkit.
#[derive(Debug)]
pub enum Error {
    /// Invalid enumeration or construction parameters.
    Param(String),
    /// A search found no entry satisfying the query's constraints.
    Infeasible(String),
    /// Mismatched lengths or arities between related inputs.
    Shape(String),
    /// Malformed or inconsistent dataset contents. `line` is 1-based and
    /// includes the header when the source is a CSV file.
    Data { line: Option<u64>, msg: String },
    /// A raw feature value falls outside the encoder's declared domain.
    Encoding(String),
    /// A model checkpoint is truncated, version-mismatched, or inconsistent.
    Checkpoint(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Param(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Infeasible(msg) => write!(f, "no feasible configuration: {msg}"),
            Error::Shape(msg) => write!(f, "shape mismatch: {msg}"),
            Error::Data { line: Some(n), msg } => write!(f, "data error at line {n}: {msg}"),
            Error::Data { line: None, msg } => write!(f, "data error: {msg}"),
            Error::Encoding(msg) => write!(f, "encoding error: {msg}"),
            Error::Checkpoint(msg) => write!(f, "checkpoint error: {msg}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 1 for usage/validation problems,
    /// 2 for I/O failures and corrupt data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Param(_) | Error::Infeasible(_) | Error::Shape(_) | Error::Encoding(_) => 1,
            Error::Data { .. } | Error::Checkpoint(_) | Error::Io(_) => 2,
        }
    }
}
