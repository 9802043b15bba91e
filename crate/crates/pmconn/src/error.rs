//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Two values with different `(p, n)` contexts were combined.
    #[error("ring context mismatch: {0}")]
    ContextMismatch(String),
    /// A ring context or parameter was out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A polynomial or file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
    /// An element that had to be a unit was not invertible.
    #[error("not invertible: {0}")]
    NotInvertible(String),
    /// An exact division by a power of p was requested on a value of lower valuation.
    #[error("inexact division: {0}")]
    InexactDivision(String),
    /// The connection is not integrable, so the requested operation is undefined.
    #[error("connection is not integrable")]
    NotIntegrable,
    /// The level of a connection does not allow the operation.
    #[error("level mismatch: {0}")]
    LevelMismatch(String),
    /// A search or series exceeded its configured bound.
    #[error("bound exceeded: {0}")]
    BoundExceeded(String),
    /// A PD truncation order was too small for the requested result.
    #[error("truncation overflow: {0}")]
    TruncationOverflow(String),
    /// A hypothesis of the operation was violated.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    /// An extension presentation was malformed.
    #[error("malformed presentation: {0}")]
    MalformedPresentation(String),
    /// The operation is outside the supported fragment.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
