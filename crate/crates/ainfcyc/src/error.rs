//! Crate-wide error type.

/// Errors raised by constructors and operations.
///
/// `Precondition` marks caller mistakes (documented preconditions),
/// `Obstruction` marks mathematically meaningful rejections (e.g. negative
/// energy in the filtered Darboux theorem) and `Internal` marks invariant
/// violations that indicate a bug, never bad input.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("arity-0 operation is not allowed in unfiltered mode")]
    ArityZeroUnfiltered,
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no unit element flagged on the basis")]
    NoUnit,
    #[error("degenerate form: {0}")]
    Degenerate(String),
    #[error("obstruction: {0}")]
    Obstruction(String),
    #[error("internal invariant violation: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
