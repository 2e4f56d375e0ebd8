//! Observable dynamics: maximal paths, events ω(C), the semiring of events
//! with constructive intersection and difference, and the probability μ.

mod paths;
mod probability;
mod semiring;

pub use paths::{maximal_paths, omega, path_distance, MaximalPath, DEFAULT_PATH_LIMIT};
pub use probability::{clamp_probability, mu, mu_event, mu_additivity_check, AdditivityReport};
pub use semiring::{
    common_refinement, difference, disjoint, intersect, intersection, max_ell, EventSet,
    Intersection,
};

use crate::dynamics::DynamicsError;
use crate::model::ModelError;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("more than {0} maximal paths")]
    TooManyPaths(usize),
    #[error("paths belong to different processes")]
    DifferentProcess,
    #[error("not a maximal path: {0}")]
    NotMaximal(String),
    #[error("refinement failed: {0}")]
    Refinement(String),
    #[error("input state has trace {0}, expected 1")]
    TraceNotOne(f64),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
