use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::TransformError;
use crate::model::{ActionId, ActionRef, PartialSystem, System};

/// Kraus entries of corresponding actions must agree to this tolerance.
pub const KRAUS_TOL: f64 = 1e-12;

/// γ: a bijection between the actions of two systems, with the process correspondence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Isomorphism {
    pub processes: Vec<(String, String)>,
    pub actions: Vec<(ActionId, ActionId)>,
}

impl Isomorphism {
    /// Pairs processes by name and actions by id.
    pub fn by_ids(s1: &System) -> Self {
        Self {
            processes: s1.processes().iter().map(|p| (p.name().to_owned(), p.name().to_owned())).collect(),
            actions: s1.actions().map(|(_, a)| (a.id().clone(), a.id().clone())).collect(),
        }
    }

    pub fn map(&self, id: &ActionId) -> Option<&ActionId> {
        self.actions.iter().find(|(a, _)| a == id).map(|(_, b)| b)
    }

    /// Process index in `s2` for each process index of `s1`.
    fn process_indices(&self, s1: &System, s2: &System) -> Result<Vec<usize>, TransformError> {
        let index = |s: &System, name: &str| s.processes().iter().position(|p| p.name() == name);
        let mut out = vec![usize::MAX; s1.processes().len()];
        let mut seen = BTreeSet::new();
        for (a, b) in &self.processes {
            let i = index(s1, a).ok_or_else(|| TransformError::NotBijective(format!("no process {a} in the source")))?;
            let j = index(s2, b).ok_or_else(|| TransformError::NotBijective(format!("no process {b} in the target")))?;
            if out[i] != usize::MAX || !seen.insert(j) {
                return Err(TransformError::NotBijective(format!("process {a} or {b} mapped twice")));
            }
            out[i] = j;
        }
        if out.contains(&usize::MAX) || s1.processes().len() != s2.processes().len() {
            return Err(TransformError::NotBijective("process correspondence is not total".into()));
        }
        Ok(out)
    }

    /// Target reference for each source action.
    fn resolve(&self, s1: &System, s2: &System) -> Result<BTreeMap<ActionRef, ActionRef>, TransformError> {
        let mut out = BTreeMap::new();
        let mut targets = BTreeSet::new();
        for (a, b) in &self.actions {
            let ra = s1.locate(a).map_err(|_| TransformError::NotBijective(format!("no action {a} in the source")))?;
            let rb = s2.locate(b).map_err(|_| TransformError::NotBijective(format!("no action {b} in the target")))?;
            if out.insert(ra, rb).is_some() || !targets.insert(rb) {
                return Err(TransformError::NotBijective(format!("{a} or {b} mapped twice")));
            }
        }
        if out.len() != s1.actions().count() || targets.len() != s2.actions().count() {
            return Err(TransformError::NotBijective("action mapping is not total".into()));
        }
        Ok(out)
    }

    /// γ(C): the partial system of `s2` anchored at the images of C's anchors.
    pub fn map_partial(&self, s1: &System, s2: &System, c: &PartialSystem) -> Result<PartialSystem, TransformError> {
        let procs = self.process_indices(s1, s2)?;
        let mut nodes = vec![0; s2.processes().len()];
        for (pi, &j) in procs.iter().enumerate() {
            let id = s1.process(pi).action(c.anchor(pi)).id();
            let image = self
                .map(id)
                .ok_or_else(|| TransformError::NotBijective(format!("{id} is not mapped")))?;
            nodes[j] = s2.locate(image)?.node;
        }
        Ok(PartialSystem::from_nodes(s2, &nodes)?)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IsomorphismReport {
    pub violations: Vec<String>,
}

impl IsomorphismReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that γ preserves →, registers and Kraus operators. Intervals and environments are free.
pub fn check_isomorphism(s1: &System, s2: &System, m: &Isomorphism) -> Result<IsomorphismReport, TransformError> {
    let procs = m.process_indices(s1, s2)?;
    let refs = m.resolve(s1, s2)?;
    let mut violations = Vec::new();
    let q1: BTreeSet<_> = s1.qubits().iter().collect();
    let q2: BTreeSet<_> = s2.qubits().iter().collect();
    if q1 != q2 {
        violations.push("systems act on different qubits".into());
    }
    for (&ra, &rb) in &refs {
        let (a, b) = (s1.action(ra), s2.action(rb));
        if procs[ra.process] != rb.process {
            violations.push(format!("{} and {} lie in non-corresponding processes", a.id(), b.id()));
            continue;
        }
        let pa = s1.process(ra.process).parent(ra.node).map(|n| ActionRef { process: ra.process, node: n });
        let pb = s2.process(rb.process).parent(rb.node).map(|n| ActionRef { process: rb.process, node: n });
        if pa.map(|p| refs[&p]) != pb {
            violations.push(format!("γ does not preserve the predecessor of {}", a.id()));
        }
        if a.register() != b.register() {
            violations.push(format!("{} and {} act on different registers", a.id(), b.id()));
        } else if !a.operation().kraus_eq(b.operation(), KRAUS_TOL) {
            violations.push(format!("{} and {} have different operations", a.id(), b.id()));
        }
    }
    Ok(IsomorphismReport { violations })
}
