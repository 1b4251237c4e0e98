use thiserror::Error;

/// Errors raised by the toolkit. Every variant carries enough context to be
/// reported verbatim by a front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("unidentifiable parameter: {0}")]
    Unidentifiable(String),

    #[error("search interval does not bracket a maximum: {0}")]
    NoBracket(String),

    #[error("malformed file {path}: {message}")]
    Format { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::DegenerateInput(_) => "degenerate-input",
            Error::Unidentifiable(_) => "unidentifiable-parameter",
            Error::NoBracket(_) => "no-bracket",
            Error::Format { .. } => "format",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
