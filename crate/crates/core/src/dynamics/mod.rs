//! One concrete system dynamics ⟦C⟧(t): every action's effect lands at a
//! scheduled instant inside its interval. Includes the axiom checker that
//! certifies this (or any other) dynamics.

mod axioms;
mod engine;
mod schedule;

pub use axioms::{check_dynamics_axioms, spanning_states, AxiomCheck, AxiomConfig, AxiomReport};
pub use engine::{
    branch_free_prefix_decomposition, enumerate_tie_orders, evolve, evolve_branch_free,
    AppliedEvent, AtomicDynamics, Dynamics, EvolutionResult, TieEnumeration, MAX_TIE_PROCESSES,
};
pub use schedule::{make_schedule, Policy, Schedule};

use crate::linalg::LinalgError;
use crate::model::{ActionId, ModelError};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("schedule has no instant for {0}")]
    MissingInstant(ActionId),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("partial system is not branch-free: {0}")]
    NotBranchFree(String),
    #[error("register mismatch: {0}")]
    Register(String),
    #[error("tie enumeration supports at most {MAX_TIE_PROCESSES} processes, got {0}")]
    TooManyProcesses(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
