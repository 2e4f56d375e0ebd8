//! Isomorphisms between systems, the instantaneous and atomizing
//! transformations of local actions, and the observable-equivalence checker.

mod atomize;
mod equivalence;
mod isomorphism;

pub use atomize::{atomize, make_instantaneous, Transformed};
pub use equivalence::{equivalence_check, test_states, EquivConfig, EquivFailure, EquivReport};
pub use isomorphism::{check_isomorphism, Isomorphism, IsomorphismReport, KRAUS_TOL};

use crate::dynamics::DynamicsError;
use crate::linalg::LinalgError;
use crate::measure::MeasureError;
use crate::model::{ActionId, ModelError, Time};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("{0} is not a local action")]
    NotLocal(ActionId),
    #[error("instant {t} lies outside the interval of {id}")]
    InstantOutside { id: ActionId, t: Time },
    #[error("precondition violated: {}", .0.join("; "))]
    Precondition(Vec<String>),
    #[error("mapping is not a bijection: {0}")]
    NotBijective(String),
    #[error("not an isomorphism: {}", .0.join("; "))]
    Isomorphism(Vec<String>),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
