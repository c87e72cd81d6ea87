use thiserror::Error;

/// Errors surfaced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    /// Non-conformable dimensions in a linear-algebra or gradient operation.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Operation called on a value in the wrong state (e.g. wrong gate kind).
    #[error("usage error: {0}")]
    Usage(String),
    /// Input that makes the requested quantity undefined (e.g. no
    /// uncensored events, all-zero weights, no comparable pairs).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}: {value}")]
    Diverged { epoch: usize, value: f64 },
    /// Enumeration bound exceeded in a brute-force routine.
    #[error("enumeration bound exceeded: {0}")]
    Size(String),
    /// CSV cell or header violates the declared schema.
    #[error("schema error at line {line}: {msg}")]
    Schema { line: u64, msg: String },
    /// Malformed CSV input.
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;
