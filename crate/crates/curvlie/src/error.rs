//! Error taxonomy. Variants map onto the CLI exit-code contract:
//! input problems (exit 2), negative verdicts (exit 1), and indeterminate
//! decisions that fall inside a tolerance guard band (exit 3).

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum CurvlieError {
    /// Malformed input: dimension mismatches, out-of-range indices,
    /// parameters outside a family's range, broken Lie axioms.
    #[error("input error: {0}")]
    Input(String),

    /// A precondition of an operation does not hold (e.g. a map that must
    /// be a derivation is not one).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A decision landed inside a tolerance guard band and cannot be made
    /// reliably; the payload describes the competing candidates.
    #[error("indeterminate: {0}")]
    Indeterminate(String),

    /// An internal consistency check failed (two independent computations
    /// of the same quantity disagree, or an impossible branch was reached).
    #[error("internal consistency error: {0}")]
    Internal(String),

    /// A numerical routine failed to converge.
    #[error("computation error: {0}")]
    Computation(String),
}

pub type Result<T> = std::result::Result<T, CurvlieError>;

impl CurvlieError {
    /// Exit code for the CLI contract: 2 input, 3 indeterminate, 1 other.
    pub fn exit_code(&self) -> i32 {
        match self {
            CurvlieError::Input(_) | CurvlieError::Precondition(_) => 2,
            CurvlieError::Indeterminate(_) => 3,
            _ => 1,
        }
    }
}
