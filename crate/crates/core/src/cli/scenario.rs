//! JSON scenario files: qubits, process trees, an initial state and schedule settings.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicsError, Policy, Schedule};
use crate::linalg::{ComplexMatrix, DensityOperator, LinalgError, OpKind, QuantumOperation, QubitId, StandardGate};
use crate::model::{Action, ActionId, ActionTree, ModelError, Process, System, Time, TimeInterval};

/// A matrix as rows of `[re, im]` pairs.
pub type MatrixSpec = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Seed the explicit matrices were drawn from, when generated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub qubits: Vec<QubitId>,
    pub processes: Vec<ProcessSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSpec {
    pub name: String,
    pub root: ActionSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub id: String,
    pub interval: TimeInterval,
    pub register: Vec<QubitId>,
    pub op: OpSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub environment: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<ActionSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OpSpec {
    Gate {
        gate: String,
    },
    Kraus {
        kraus: Vec<MatrixSpec>,
        #[serde(default = "general")]
        kind: OpKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Choi {
        choi: MatrixSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
}

fn general() -> OpKind {
    OpKind::General
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateSpec {
    /// Computational basis state by index (big-endian over `qubits`).
    Basis(usize),
    Amplitudes(Vec<[f64; 2]>),
    Density(MatrixSpec),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<Policy>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<ActionId, Time>,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("action {id}: {source}")]
    Op { id: String, source: LinalgError },
    #[error("initial state: {0}")]
    State(LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// A loaded scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub system: System,
    pub initial_state: DensityOperator,
    pub policy: Policy,
    pub overrides: HashMap<ActionId, Time>,
    pub description: Option<String>,
    pub seed: Option<u64>,
}

impl Scenario {
    /// The configured schedule, or `policy` with the file's overrides applied.
    pub fn schedule(&self, policy: Option<Policy>) -> Result<Schedule, DynamicsError> {
        Schedule::with_overrides(&self.system, policy.unwrap_or(self.policy), &self.overrides)
    }
}

pub fn matrix_from_spec(m: &MatrixSpec) -> Result<ComplexMatrix, LinalgError> {
    ComplexMatrix::from_rows(
        m.iter()
            .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
            .collect(),
    )
}

pub fn matrix_to_spec(m: &ComplexMatrix) -> MatrixSpec {
    m.to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn op_from_spec(spec: &OpSpec, register: Vec<QubitId>) -> Result<QuantumOperation, LinalgError> {
    match spec {
        OpSpec::Gate { gate } => QuantumOperation::named(gate, register),
        OpSpec::Kraus { kraus, kind, label } => {
            let ks = kraus.iter().map(matrix_from_spec).collect::<Result<_, _>>()?;
            let op = QuantumOperation::import_kraus(register, ks, *kind)?;
            Ok(match label {
                Some(l) => op.with_label(l.clone()),
                None => op,
            })
        }
        OpSpec::Choi { choi, label } => {
            let op = QuantumOperation::from_choi(register, &matrix_from_spec(choi)?)?;
            Ok(match label {
                Some(l) => op.with_label(l.clone()),
                None => op,
            })
        }
    }
}

fn op_to_spec(op: &QuantumOperation) -> OpSpec {
    if let Some(label) = op.label() {
        if let Ok(gate) = label.parse::<StandardGate>() {
            if QuantumOperation::standard(&gate, op.register().to_vec()).is_ok_and(|g| g.kraus_eq(op, 0.0) && g.kind() == op.kind()) {
                return OpSpec::Gate { gate: label.to_owned() };
            }
        }
    }
    OpSpec::Kraus {
        kraus: op.kraus().iter().map(matrix_to_spec).collect(),
        kind: op.kind(),
        label: op.label().map(str::to_owned),
    }
}

fn tree_from_spec(a: &ActionSpec) -> Result<ActionTree, ScenarioError> {
    let op = op_from_spec(&a.op, a.register.clone()).map_err(|source| ScenarioError::Op {
        id: a.id.clone(),
        source,
    })?;
    let action = Action::new(a.id.as_str(), a.interval.clone(), op, a.environment.iter().cloned())?;
    let children = a.children.iter().map(tree_from_spec).collect::<Result<_, _>>()?;
    Ok(ActionTree::node(action, children))
}

fn spec_from_node(p: &Process, n: usize) -> ActionSpec {
    let a = p.action(n);
    ActionSpec {
        id: a.id().to_string(),
        interval: a.interval().clone(),
        register: a.register().to_vec(),
        op: op_to_spec(a.operation()),
        environment: a.environment().iter().cloned().collect(),
        children: p.children(n).iter().map(|&k| spec_from_node(p, k)).collect(),
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn from_system(system: &System, initial: Option<StateSpec>) -> Self {
        Self {
            description: None,
            seed: None,
            qubits: system.qubits().to_vec(),
            processes: system
                .processes()
                .iter()
                .map(|p| ProcessSpec {
                    name: p.name().to_owned(),
                    root: spec_from_node(p, p.root()),
                })
                .collect(),
            initial_state: initial,
            schedule: None,
        }
    }

    pub fn build(&self) -> Result<Scenario, ScenarioError> {
        let processes = self
            .processes
            .iter()
            .map(|p| Process::from_tree(p.name.clone(), tree_from_spec(&p.root)?).map_err(ScenarioError::from))
            .collect::<Result<Vec<_>, _>>()?;
        let system = System::with_qubits(processes, self.qubits.clone())?;
        let reg = self.qubits.clone();
        let initial_state = match &self.initial_state {
            None => DensityOperator::basis(reg, 0),
            Some(StateSpec::Basis(i)) => DensityOperator::basis(reg, *i),
            Some(StateSpec::Amplitudes(a)) => {
                let amps: Vec<Complex64> = a.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
                DensityOperator::pure(reg, &amps)
            }
            Some(StateSpec::Density(m)) => matrix_from_spec(m).and_then(|m| DensityOperator::new(reg, m)),
        }
        .map_err(ScenarioError::State)?;
        let schedule = self.schedule.clone().unwrap_or_default();
        Ok(Scenario {
            system,
            initial_state,
            policy: schedule.policy.unwrap_or(Policy::Completion),
            overrides: schedule.overrides.into_iter().collect(),
            description: self.description.clone(),
            seed: self.seed,
        })
    }
}

pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
    ScenarioFile::read(path)?.build()
}
