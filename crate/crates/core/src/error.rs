use thiserror::Error;

use crate::spin::Axis;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("eigendecomposition failed to converge")]
    EigenFailed,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("site {site} is out of range for a model with {n_outer} outer qubits")]
    SiteOutOfRange { site: usize, n_outer: usize },

    #[error("operator spec has no terms")]
    EmptyOperator,

    #[error("operator spec repeats the term ({site}, {axis})")]
    DuplicateTerm { site: usize, axis: Axis },

    #[error("W and V both act on site {site}; their supports must be disjoint")]
    OverlappingSupports { site: usize },

    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("empty sweep: {0}")]
    EmptySweep(String),

    #[error(
        "commutator and moment evaluations disagree at t = {t}: {commutator:e} vs {moments:e}"
    )]
    DualPathMismatch {
        t: f64,
        commutator: f64,
        moments: f64,
    },

    #[error("scrambling value {value:e} at t = {t} is negative beyond roundoff")]
    NegativeScrambling { t: f64, value: f64 },
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical invariant, as opposed to bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            Error::DualPathMismatch { .. } | Error::NegativeScrambling { .. } | Error::NotHermitian { .. }
        )
    }
}
