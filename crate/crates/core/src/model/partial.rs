use std::fmt;

use super::{ActionId, ModelError, Region, System, Time};
use crate::linalg::check_validity;

/// Per-process anchor as supplied by callers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Anchor {
    /// The process itself.
    Whole,
    At(ActionId),
}

/// A system with one anchor fixed per process: the rooted path to the anchor
/// plus the subtree below it.
///
/// Anchors are stored canonically: the shallowest node inducing the same
/// action set. A node and its only child induce the same set, and the whole
/// process is the root's partial process, so two partial systems are equal
/// exactly when they select the same actions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialSystem {
    fingerprint: u64,
    anchors: Vec<usize>,
}

impl PartialSystem {
    /// The system as a partial system of itself.
    pub fn whole(sys: &System) -> Self {
        Self {
            fingerprint: sys.fingerprint(),
            anchors: sys.processes().iter().map(|p| p.root()).collect(),
        }
    }

    /// Anchors given as node indices, one per process.
    pub fn from_nodes(sys: &System, nodes: &[usize]) -> Result<Self, ModelError> {
        if nodes.len() != sys.processes().len() {
            return Err(ModelError::AnchorCount {
                expected: sys.processes().len(),
                found: nodes.len(),
            });
        }
        let anchors = nodes
            .iter()
            .enumerate()
            .map(|(pi, &n)| {
                if n >= sys.process(pi).len() {
                    return Err(ModelError::Structure(format!("node {n} out of range")));
                }
                Ok(canonical(sys, pi, n))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            fingerprint: sys.fingerprint(),
            anchors,
        })
    }

    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    pub fn anchor(&self, process: usize) -> usize {
        self.anchors[process]
    }

    pub fn check_system(&self, sys: &System) -> Result<(), ModelError> {
        if self.fingerprint == sys.fingerprint() && self.anchors.len() == sys.processes().len() {
            Ok(())
        } else {
            Err(ModelError::DifferentSystem)
        }
    }

    /// Copy with the anchor of one process replaced.
    pub fn with_anchor(&self, sys: &System, process: usize, node: usize) -> Self {
        let mut anchors = self.anchors.clone();
        anchors[process] = canonical(sys, process, node);
        Self {
            fingerprint: self.fingerprint,
            anchors,
        }
    }

    /// Action nodes of one process: root path to the anchor, then the subtree below it.
    pub fn induced(&self, sys: &System, process: usize) -> Vec<usize> {
        let p = sys.process(process);
        let a = self.anchors[process];
        let mut out = p.path_to(a);
        out.extend(p.subtree(a).into_iter().skip(1));
        out
    }

    pub fn contains(&self, sys: &System, process: usize, node: usize) -> bool {
        let p = sys.process(process);
        let a = self.anchors[process];
        p.precedes_or_eq(node, a) || p.precedes_or_eq(a, node)
    }

    /// Node at or below the anchor where the process first branches, if any.
    pub fn branch_point(&self, sys: &System, process: usize) -> Option<usize> {
        let p = sys.process(process);
        let mut cur = self.anchors[process];
        loop {
            match p.children(cur) {
                [] => return None,
                [only] => cur = *only,
                _ => return Some(cur),
            }
        }
    }

    /// Anchors rendered as action ids, `*` for a whole process.
    pub fn display<'a>(&'a self, sys: &'a System) -> impl fmt::Display + 'a {
        DisplayPartial { c: self, sys }
    }

    pub fn anchor_ids(&self, sys: &System) -> Vec<Anchor> {
        self.anchors
            .iter()
            .enumerate()
            .map(|(pi, &n)| {
                let p = sys.process(pi);
                if n == p.root() {
                    Anchor::Whole
                } else {
                    Anchor::At(p.action(n).id().clone())
                }
            })
            .collect()
    }
}

struct DisplayPartial<'a> {
    c: &'a PartialSystem,
    sys: &'a System,
}

impl fmt::Display for DisplayPartial<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (pi, anchor) in self.c.anchor_ids(self.sys).iter().enumerate() {
            if pi > 0 {
                f.write_str(" || ")?;
            }
            let name = self.sys.process(pi).name();
            match anchor {
                Anchor::Whole => write!(f, "{name}")?,
                Anchor::At(id) => write!(f, "{name}/{id}")?,
            }
        }
        Ok(())
    }
}

/// Shallowest node inducing the same partial process as `node`.
fn canonical(sys: &System, process: usize, node: usize) -> usize {
    let p = sys.process(process);
    let mut cur = node;
    while let Some(parent) = p.parent(cur) {
        if p.children(parent).len() != 1 {
            break;
        }
        cur = parent;
    }
    cur
}

/// Partial system with the given anchor per process.
pub fn partial(s: &System, anchors: &[Anchor]) -> Result<PartialSystem, ModelError> {
    let nodes = anchors
        .iter()
        .enumerate()
        .map(|(pi, a)| match a {
            Anchor::Whole => Ok(s.process(pi).root()),
            Anchor::At(id) => {
                let r = s.locate(id)?;
                if r.process != pi {
                    return Err(ModelError::Structure(format!(
                        "{id} is not an action of process {}",
                        s.process(pi).name()
                    )));
                }
                Ok(r.node)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    PartialSystem::from_nodes(s, &nodes)
}

/// The elementary refinement step: one partial system per child of the
/// branching node reached from the anchor of `process`.
pub fn children_expansion(
    s: &System,
    c: &PartialSystem,
    process: usize,
) -> Result<Vec<PartialSystem>, ModelError> {
    c.check_system(s)?;
    let p = s.process(process);
    let node = c.branch_point(s, process).ok_or_else(|| {
        ModelError::LeafExpansion(p.action(c.anchor(process)).id().clone())
    })?;
    Ok(p.children(node)
        .iter()
        .map(|&b| c.with_anchor(s, process, b))
        .collect())
}

/// After `t`, the partial system contains every future branch, so its evolved trace stays constant.
///
/// Holds per process when some node inducing the same partial process (the
/// anchor or a descendant along a branch-free chain) ends by `t`, or every
/// action of the partial process meeting [t, end of that node] is trace-preserving.
pub fn is_trace_preserving_after(s: &System, c: &PartialSystem, t: &Time) -> bool {
    (0..s.processes().len()).all(|pi| process_tp_after(s, c, pi, t))
}

fn process_tp_after(s: &System, c: &PartialSystem, pi: usize, t: &Time) -> bool {
    let p = s.process(pi);
    let induced = c.induced(s, pi);
    let mut cur = c.anchor(pi);
    loop {
        let end = p.action(cur).interval().hi().clone();
        if t >= &end {
            return true;
        }
        let window = Region::closed(t.clone(), end);
        let ok = induced
            .iter()
            .map(|&n| p.action(n))
            .filter(|a| window.intersects(a.interval()))
            .all(|a| check_validity(a.operation()).trace_preserving);
        if ok {
            return true;
        }
        match p.children(cur) {
            [only] => cur = *only,
            _ => return false,
        }
    }
}

/// Depth of the canonical anchor, maximized over processes.
pub fn ell(s: &System, c: &PartialSystem) -> usize {
    c.anchors()
        .iter()
        .enumerate()
        .map(|(pi, &n)| s.process(pi).depth(n))
        .max()
        .unwrap_or(0)
}

/// Every partial system of `s`, optionally limited to ℓ ≤ `max_ell`.
pub fn all_partials(s: &System, max_ell: Option<usize>) -> Vec<PartialSystem> {
    let per_process: Vec<Vec<usize>> = s
        .processes()
        .iter()
        .map(|p| {
            p.bfs()
                .into_iter()
                .filter(|&n| {
                    let canonical_node = match p.parent(n) {
                        None => true,
                        Some(parent) => p.children(parent).len() > 1,
                    };
                    canonical_node && max_ell.is_none_or(|m| p.depth(n) <= m)
                })
                .collect()
        })
        .collect();
    let mut out = vec![Vec::new()];
    for choices in &per_process {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                choices.iter().map(move |&n| {
                    let mut v = prefix.clone();
                    v.push(n);
                    v
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|anchors| PartialSystem {
            fingerprint: s.fingerprint(),
            anchors,
        })
        .collect()
}
