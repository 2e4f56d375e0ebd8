//! Actions with exact time intervals, quantum processes as branching trees,
//! distributed systems, partial systems and their classification predicates.

mod action;
mod partial;
mod process;
mod system;
mod time;
mod unfold;

pub use action::{restrict, Action, ActionId};
pub use partial::{
    all_partials, children_expansion, ell, is_trace_preserving_after, partial, Anchor,
    PartialSystem,
};
pub use process::{validate_process, ActionTree, Process, ProcessReport};
pub use system::{is_atomic, is_local, validate_system, ActionRef, System, SystemReport};
pub use time::{Region, Span, Time, TimeInterval};
pub use unfold::{unfold, ProcessTemplate, MAX_UNFOLD_DEPTH};

use crate::linalg::LinalgError;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid time literal {0:?}")]
    BadTime(String),
    #[error("invalid interval {0}")]
    InvalidInterval(String),
    #[error("action {0} is unitary but names an environment")]
    UnitaryWithEnvironment(ActionId),
    #[error("duplicate action id {0}")]
    DuplicateAction(ActionId),
    #[error("unknown action {0}")]
    UnknownAction(ActionId),
    #[error("malformed structure: {0}")]
    Structure(String),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("system is not trace-preserving: {0}")]
    NotTracePreserving(String),
    #[error("expected {expected} anchors, got {found}")]
    AnchorCount { expected: usize, found: usize },
    #[error("partial system belongs to a different system")]
    DifferentSystem,
    #[error("cannot expand at leaf {0}")]
    LeafExpansion(ActionId),
    #[error("invalid template: {0}")]
    Template(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
