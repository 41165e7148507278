use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Operands have incompatible variants or dimensions, or contain non-finite entries.
    #[error("shape error: {0}")]
    Shape(String),

    /// An argument lies outside the domain of an operation (e.g. iteration index 0).
    #[error("domain error: {0}")]
    Domain(String),

    /// A sample of a dataset fails a feasibility or consistency check.
    #[error("validation error at sample {index}: {reason}")]
    Validation { index: usize, reason: String },

    /// Malformed dataset text.
    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    /// Invalid learner, solver or generator configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical routine failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The forward solver failed on one sample.
    #[error("solver failed on sample {index}: {source}")]
    Solver {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}
