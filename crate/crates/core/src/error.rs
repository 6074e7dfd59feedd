use thiserror::Error;

/// Errors raised by the tail-ratio toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid distribution spec: {0}")]
    InvalidSpec(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("unbounded: {0}")]
    Unbounded(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    /// A numeric routine could not reach the requested accuracy. `achieved`
    /// carries the best bracket (or estimate interval) that was obtained.
    #[error("precision: {message} (achieved [{}, {}])", achieved.0, achieved.1)]
    Precision { message: String, achieved: (f64, f64) },

    #[error("range: {0}")]
    Range(String),

    #[error("resource limit: {0}")]
    Resource(String),
}

impl Error {
    /// Short machine-readable code used in CLI error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::Unsupported(_) => "unsupported",
            Error::DegenerateGrid(_) => "degenerate_grid",
            Error::Unbounded(_) => "unbounded",
            Error::Inconclusive(_) => "inconclusive",
            Error::Precision { .. } => "precision",
            Error::Range(_) => "range",
            Error::Resource(_) => "resource",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
