use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ModelError, Region, TimeInterval};
use crate::linalg::{OpKind, QuantumOperation, QubitId};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionId(String);

impl ActionId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ActionId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl From<String> for ActionId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

/// A timed application of a quantum operation to a register, using some
/// measurement-device environment.
#[derive(Clone, Debug, PartialEq)]
pub struct Action {
    id: ActionId,
    interval: TimeInterval,
    operation: QuantumOperation,
    environment: BTreeSet<String>,
}

impl Action {
    pub fn new(
        id: impl Into<ActionId>,
        interval: TimeInterval,
        operation: QuantumOperation,
        environment: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self, ModelError> {
        let id = id.into();
        let environment: BTreeSet<String> = environment.into_iter().map(Into::into).collect();
        if operation.kind() == OpKind::Unitary && !environment.is_empty() {
            return Err(ModelError::UnitaryWithEnvironment(id));
        }
        Ok(Self {
            id,
            interval,
            operation,
            environment,
        })
    }

    /// Action without environment labels.
    pub fn bare(
        id: impl Into<ActionId>,
        interval: TimeInterval,
        operation: QuantumOperation,
    ) -> Result<Self, ModelError> {
        Self::new(id, interval, operation, Vec::<String>::new())
    }

    pub fn id(&self) -> &ActionId {
        &self.id
    }

    pub fn interval(&self) -> &TimeInterval {
        &self.interval
    }

    pub fn register(&self) -> &[QubitId] {
        self.operation.register()
    }

    pub fn operation(&self) -> &QuantumOperation {
        &self.operation
    }

    pub fn environment(&self) -> &BTreeSet<String> {
        &self.environment
    }

    pub fn shares_qubit(&self, other: &Self) -> bool {
        self.register().iter().any(|q| other.register().contains(q))
    }

    pub fn with_interval(mut self, interval: TimeInterval) -> Self {
        self.interval = interval;
        self
    }

    pub fn with_environment(mut self, environment: BTreeSet<String>) -> Self {
        self.environment = environment;
        self
    }

    pub fn with_id(mut self, id: ActionId) -> Self {
        self.id = id;
        self
    }
}

/// Actions whose interval meets `region`.
pub fn restrict<'a>(actions: impl IntoIterator<Item = &'a Action>, region: &Region) -> Vec<&'a Action> {
    actions
        .into_iter()
        .filter(|a| region.intersects(a.interval()))
        .collect()
}
