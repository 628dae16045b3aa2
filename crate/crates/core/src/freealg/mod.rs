//! Degree-truncated free Lie algebroids generated by an anchored bundle with
//! connection, the canonical extension of the connection, and checks of the
//! properties that extension is expected to have.
//!
//! Basis words are either all anticommutative magma words ([`FreeMode::Almost`])
//! or Hall words, with the Jacobi ideal eliminated ([`FreeMode::Quotient`]).

mod checks;
mod extend;
pub mod sections;
mod words;

use thiserror::Error;

use crate::calculus::CalcError;
use crate::exprjet::DomainError;

pub use checks::*;
pub use extend::{free_extend, vector_commutator, FreeMode, FreeOptions, FreeTruncation, PIVOT_ACCEPT, PIVOT_REJECT};
pub use words::{hall_basis, magma_basis, witt, HallWord, WordTable, HALL_ORDER, MAX_DEGREE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FreeError {
    #[error("{0}")]
    Degree(String),
    #[error("indeterminate rank decision in degree {degree}: pivot {pivot:e} lies between 1e-12 and 1e-8")]
    Indeterminate { degree: usize, pivot: f64 },
    #[error("non-locally-free locus detected at {point:?}: relation leaves anchor residual {residual:e}")]
    NonLocallyFree { point: Vec<f64>, residual: f64 },
    #[error("Hall words do not form a basis of the quotient in degree {0}")]
    Basis(usize),
    #[error("generators fail the Killing check: residual {residual:e} exceeds {tolerance:e}")]
    GeneratorNotKilling { residual: f64, tolerance: f64 },
    #[error("{0}")]
    Precondition(String),
    #[error(transparent)]
    Calc(#[from] CalcError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}
