use thiserror::Error;

/// Unified error type for all modules.
///
/// Violations found by the verification suites are *data* (reported in the
/// corresponding report structs), not errors; errors signal misuse of an
/// operation or an input outside its domain.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// An index or argument outside the range an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A textual specification (weight model, block rule) failed to parse
    /// or described an invalid object.
    #[error("invalid specification: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn spec(msg: impl Into<String>) -> Self {
        Error::Spec(msg.into())
    }
}
