use thiserror::Error;

/// Errors raised by the computational core.
///
/// The variants split into two families that callers (the CLI in
/// particular) map onto different exit codes: bad inputs
/// (`Validation`, `Usage`, `Config`, `Io`) and inputs that are well formed
/// but outside the domain where a result exists (`Domain`, `Unsupported`).
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors caused by malformed or out-of-contract inputs.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::Usage(_) | Error::Config(_) | Error::Io { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
