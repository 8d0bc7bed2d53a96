use thiserror::Error;

/// Every failure the toolkit reports. The variant decides the diagnostic
/// category (and the CLI exit code).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse: {0}")]
    Parse(String),
    #[error("validation: {0}")]
    Validation(String),
    #[error("index: {0}")]
    Index(String),
    #[error("config: {0}")]
    Config(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl Error {
    /// Short machine-readable category, the prefix of the `Display` form.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::Validation(_) => "validation",
            Error::Index(_) => "index",
            Error::Config(_) => "config",
            Error::Usage(_) => "usage",
            Error::Io(_) => "io",
            Error::Internal(_) => "internal",
        }
    }

    pub fn detail(&self) -> &str {
        match self {
            Error::Parse(s)
            | Error::Validation(s)
            | Error::Index(s)
            | Error::Config(s)
            | Error::Usage(s)
            | Error::Io(s)
            | Error::Internal(s) => s,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
