//! Error types shared across the crate.
//!
//! Failures split into two broad families that callers (in particular the
//! CLI) treat differently:
//!
//! * malformed input: unparseable JSON, bad grid headers, unknown gallery
//!   names, dimension mismatches;
//! * violated math preconditions: non-convex sample data, unbounded
//!   polytopes, evaluation points outside a domain, quantities that fail
//!   to stabilize under refinement.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input that could not be parsed or that names something unknown.
    #[error("invalid input: {0}")]
    Input(String),

    /// Dimension of an argument disagrees with the object it is used with.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A polytope failed a structural requirement (unbounded, empty
    /// interior, non-primitive normal, ...). Carries a certificate of the
    /// violation where one exists.
    #[error("invalid polytope: {0}")]
    Geometry(String),

    /// Sampled data violated midpoint convexity. Reports the first
    /// offending triple so the caller can locate it.
    #[error("non-convex data: {0}")]
    NonConvex(String),

    /// A mathematical precondition of an operation does not hold
    /// (point outside the domain, zero not interior, empty dual domain, ...).
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A quantity that must stabilize under refinement kept growing.
    #[error("did not stabilize: {0}")]
    Unstable(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the failure is a malformed request rather than a violated
    /// math precondition. The CLI maps the former to exit code 2 and the
    /// latter to exit code 3.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Input(_) | Error::Dimension(_) | Error::Io(_))
    }
}
