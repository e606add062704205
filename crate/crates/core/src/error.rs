use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reasons a Neumann direction `d` cannot be produced for a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NotApplicable {
    /// The matrix is strictly copositive, so no cone direction makes `b` negative.
    StrictlyCopositive,
    /// Some support carries a positive kernel vector; the constant solution is used instead.
    ConstantSolutionExists,
    /// Minimum of `b` on the simplex sits inside the dead-band; no strictly negative direction.
    NoStrictlyNegativeDirection,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("matrix is not symmetric: max |b_ij - b_ji| = {0:e}")]
    Asymmetric(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("not applicable: {0:?}")]
    NotApplicable(NotApplicable),
}

impl Error {
    /// Short stable tag, used by the command line for machine-parsable errors.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Dimension { .. } => "dimension",
            Error::Parameter(_) => "parameter",
            Error::Capacity(_) => "capacity",
            Error::Asymmetric(_) => "asymmetric",
            Error::Precondition(_) => "precondition",
            Error::Internal(_) => "internal",
            Error::NotApplicable(_) => "not-applicable",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
