//! Complex linear algebra for small multi-qubit registers: density operators,
//! Kraus-form quantum operations, standard gates and validity checks.

mod matrix;
mod operation;
pub mod random;
mod register;
mod state;

pub use matrix::{log2_exact, ComplexMatrix};
pub use operation::{
    apply, apply_embedded, check_validity, compose, tensor, OpKind, QuantumOperation,
    StandardGate, ValidityReport,
};
pub use register::{embed, permute, register, register_union, QubitId};
pub use state::{trace, DensityOperator, StateReport};

/// Tolerance for validity checks (Hermiticity, PSD, Loewner order, trace bounds).
pub const VALIDITY_TOL: f64 = 1e-9;
/// Tolerance for equality assertions between computed states.
pub const EQ_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("register mismatch: {0}")]
    Register(String),
    #[error("invalid operation: {0}")]
    InvalidOperation(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("unknown operation {0:?}")]
    UnknownOperation(String),
    #[error("{name} acts on {expected} qubit(s), got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
}
