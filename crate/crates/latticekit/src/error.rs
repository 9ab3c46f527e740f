//! Error types shared by the whole crate.

use thiserror::Error;

/// Errors produced by lattice construction, criterion evaluation and
/// approximation routines.
#[derive(Debug, Error)]
pub enum LatticeError {
    /// A parameter is outside its admissible range (wrong α, λ, τ, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A coordinate subset refers to a coordinate beyond the model dimension.
    #[error("coordinate {coord} out of range for dimension {dim}")]
    OutOfRange { coord: usize, dim: usize },

    /// An explicit weight model has no entry for the requested subset.
    #[error("explicit weight model is missing subset {0:?}")]
    MissingWeight(Vec<usize>),

    /// A computation would exceed a configured size cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A bound formula is not applicable for the given inputs (e.g. M < 1).
    #[error("bound not applicable: {0}")]
    NotApplicable(String),

    /// Weights degenerate to zero where a positive quantity is required.
    #[error("degenerate weights: {0}")]
    DegenerateWeights(String),

    /// A linear solve hit a numerically singular system.
    #[error("near-singular system: {0}")]
    NearSingular(String),

    /// Data violates an internal consistency requirement.
    #[error("consistency error: {0}")]
    Consistency(String),

    /// A structured text file failed to parse.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LatticeError>;
