use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use super::{Action, ActionId, ModelError, Process, ProcessReport};
use crate::linalg::QubitId;

/// Position of an action inside a system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionRef {
    pub process: usize,
    pub node: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SystemReport {
    pub processes: Vec<ProcessReport>,
    pub environment_disjoint: bool,
    pub ids_unique: bool,
    pub violations: Vec<String>,
}

impl SystemReport {
    pub fn ok(&self) -> bool {
        self.environment_disjoint && self.ids_unique && self.processes.iter().all(ProcessReport::ok)
    }

    pub fn trace_preserving(&self) -> bool {
        self.processes.iter().all(|p| p.trace_preserving)
    }

    pub fn aligned(&self) -> bool {
        self.processes.iter().all(|p| p.aligned)
    }

    pub fn all_violations(&self) -> Vec<String> {
        self.processes
            .iter()
            .flat_map(|p| p.violations.iter().cloned())
            .chain(self.violations.iter().cloned())
            .collect()
    }
}

/// Parallel composition of processes over a shared qubit register.
#[derive(Clone, Debug)]
pub struct System {
    processes: Vec<Process>,
    qubits: Vec<QubitId>,
    locate: HashMap<ActionId, ActionRef>,
    report: SystemReport,
    fingerprint: u64,
}

impl System {
    /// System over the sorted union of the processes' qubits.
    pub fn new(processes: Vec<Process>) -> Result<Self, ModelError> {
        let qubits: BTreeSet<QubitId> = processes.iter().flat_map(Process::qubits).collect();
        Self::with_qubits(processes, qubits.into_iter().collect())
    }

    /// System over an explicit qubit order, which must cover every register.
    pub fn with_qubits(processes: Vec<Process>, qubits: Vec<QubitId>) -> Result<Self, ModelError> {
        if processes.is_empty() {
            return Err(ModelError::Structure("system without processes".into()));
        }
        let mut seen = BTreeSet::new();
        for q in &qubits {
            if !seen.insert(q) {
                return Err(ModelError::Structure(format!("qubit {q} listed twice")));
            }
        }
        for p in &processes {
            if let Some(q) = p.qubits().iter().find(|q| !seen.contains(q)) {
                return Err(ModelError::Structure(format!(
                    "process {} uses undeclared qubit {q}",
                    p.name()
                )));
            }
        }
        let mut locate = HashMap::new();
        let mut ids_unique = true;
        let mut violations = Vec::new();
        for (pi, p) in processes.iter().enumerate() {
            for (node, a) in p.actions().iter().enumerate() {
                if locate.insert(a.id().clone(), ActionRef { process: pi, node }).is_some() {
                    ids_unique = false;
                    violations.push(format!("action id {} used more than once", a.id()));
                }
            }
        }
        let mut environment_disjoint = true;
        let envs: Vec<BTreeSet<String>> = processes.iter().map(Process::environment).collect();
        for i in 0..envs.len() {
            for j in i + 1..envs.len() {
                if let Some(label) = envs[i].intersection(&envs[j]).next() {
                    environment_disjoint = false;
                    violations.push(format!(
                        "environment {label:?} shared by {} and {}",
                        processes[i].name(),
                        processes[j].name()
                    ));
                }
            }
        }
        let report = SystemReport {
            processes: processes.iter().map(Process::validate).collect(),
            environment_disjoint,
            ids_unique,
            violations,
        };
        let mut h = DefaultHasher::new();
        for p in &processes {
            p.name().hash(&mut h);
            for n in p.bfs() {
                p.action(n).id().hash(&mut h);
                p.parent(n).hash(&mut h);
            }
        }
        Ok(Self {
            processes,
            qubits,
            locate,
            report,
            fingerprint: h.finish(),
        })
    }

    pub fn processes(&self) -> &[Process] {
        &self.processes
    }

    pub fn process(&self, i: usize) -> &Process {
        &self.processes[i]
    }

    pub fn qubits(&self) -> &[QubitId] {
        &self.qubits
    }

    pub fn report(&self) -> &SystemReport {
        &self.report
    }

    /// Identifies the tree structure; partial systems remember it to catch mix-ups.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn locate(&self, id: &ActionId) -> Result<ActionRef, ModelError> {
        self.locate
            .get(id)
            .copied()
            .ok_or_else(|| ModelError::UnknownAction(id.clone()))
    }

    pub fn action(&self, r: ActionRef) -> &Action {
        self.processes[r.process].action(r.node)
    }

    pub fn action_by_id(&self, id: &ActionId) -> Result<&Action, ModelError> {
        Ok(self.action(self.locate(id)?))
    }

    /// Every action with its position, in process order then breadth-first order.
    pub fn actions(&self) -> impl Iterator<Item = (ActionRef, &Action)> + '_ {
        self.processes.iter().enumerate().flat_map(|(pi, p)| {
            p.bfs()
                .into_iter()
                .map(move |node| (ActionRef { process: pi, node }, p.action(node)))
        })
    }

    /// Rejects systems that fail the structural checks.
    pub fn require_valid(&self) -> Result<(), ModelError> {
        if self.report.ok() {
            Ok(())
        } else {
            Err(ModelError::InvalidSystem(self.report.all_violations().join("; ")))
        }
    }

    pub fn require_trace_preserving(&self) -> Result<(), ModelError> {
        self.require_valid()?;
        if self.report.trace_preserving() {
            Ok(())
        } else {
            Err(ModelError::NotTracePreserving(self.report.all_violations().join("; ")))
        }
    }

    pub fn is_local_ref(&self, r: ActionRef) -> bool {
        let a = self.action(r);
        self.actions()
            .filter(|(o, _)| o.process != r.process)
            .all(|(_, b)| !a.shares_qubit(b) || !a.interval().intersects(b.interval()))
    }

    pub fn local_actions(&self) -> Vec<ActionRef> {
        self.actions()
            .map(|(r, _)| r)
            .filter(|&r| self.is_local_ref(r))
            .collect()
    }

    pub fn max_time(&self) -> super::Time {
        self.actions()
            .map(|(_, a)| a.interval().hi().clone())
            .max()
            .unwrap_or_else(super::Time::zero)
    }
}

pub fn validate_system(s: &System) -> SystemReport {
    s.report().clone()
}

/// Register-disjoint or time-disjoint from every action of every other process.
pub fn is_local(a: &ActionId, s: &System) -> Result<bool, ModelError> {
    Ok(s.is_local_ref(s.locate(a)?))
}

/// Every cross-process pair in `d` has strictly ordered intervals.
pub fn is_atomic(d: &[ActionId], s: &System) -> Result<bool, ModelError> {
    let refs: Vec<ActionRef> = d.iter().map(|id| s.locate(id)).collect::<Result<_, _>>()?;
    for (i, &x) in refs.iter().enumerate() {
        for &y in &refs[i + 1..] {
            if x.process == y.process {
                continue;
            }
            let (a, b) = (s.action(x).interval(), s.action(y).interval());
            if !a.before(b) && !b.before(a) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
