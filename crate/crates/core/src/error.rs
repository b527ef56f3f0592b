use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// Observation outside the support of the GEV distribution.
    #[error("out of support: {0}")]
    OutOfSupport(String),

    #[error("unknown station: {0}")]
    UnknownStation(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed or inconsistent input data, with the offending file line when known.
    #[error("data error{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Data { message: String, line: Option<usize> },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("invalid configuration file: {0}")]
    TomlDe(#[from] toml::de::Error),

    #[error("cannot serialize configuration: {0}")]
    TomlSer(#[from] toml::ser::Error),
}

impl Error {
    pub(crate) fn data(message: impl Into<String>, line: Option<usize>) -> Self {
        Error::Data {
            message: message.into(),
            line,
        }
    }
}
