//! Error type shared by all modules.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid parameter or configuration (bad spec fields, inconsistent
    /// lambdas, out-of-domain arguments).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A sequence is too short for the requested operation.
    #[error("sequence too short: need at least {need} samples, got {got}")]
    TooShort { need: usize, got: usize },

    /// A bound query has no solution in its feasibility domain.
    #[error("infeasible bound query: {0}")]
    Infeasible(String),

    /// Malformed trace data; `line` is 1-based and counts the header.
    #[error("trace data error at line {line}: {msg}")]
    Trace { line: usize, msg: String },

    /// The least-squares system cannot be solved at the configured ridge.
    #[error("rank-deficient least-squares system: {0}")]
    RankDeficient(String),

    /// Unwrapping diagnostics indicate the recovery contract was violated
    /// (only raised in strict mode).
    #[error("recovery contract violated: {0}")]
    Contract(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
