use thiserror::Error;

/// Errors raised by the series, field, relation and family machinery.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Operands that cannot be combined: mismatched orders, variables,
    /// family indices or slot counts.
    #[error("structural error: {0}")]
    Structural(String),
    /// A value outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Evaluation too close to a zero of a denominator factor.
    #[error("pole: {0}")]
    Pole(String),
    /// Input shape the implementation deliberately does not handle.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Bad configuration or unknown identifier.
    #[error("usage: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
