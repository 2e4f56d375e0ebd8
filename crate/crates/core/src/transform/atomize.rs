use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{Isomorphism, TransformError};
use crate::model::{ActionId, ActionRef, Process, System, Time, TimeInterval};

/// A transformed system and the correspondence from the original.
#[derive(Clone, Debug)]
pub struct Transformed {
    pub system: System,
    pub gamma: Isomorphism,
}

/// Siblings of `r` (including `r`) when its parent branches, else just `r`.
fn sibling_group(p: &Process, node: usize) -> Vec<usize> {
    match p.parent(node) {
        Some(q) if p.children(q).len() > 1 => p.children(q).to_vec(),
        _ => vec![node],
    }
}

/// Rebuilds `s` with new intervals for some actions and cleared environments for them.
fn rebuild(s: &System, instants: &BTreeMap<ActionRef, Time>) -> Result<System, TransformError> {
    let processes = s
        .processes()
        .iter()
        .enumerate()
        .map(|(pi, p)| {
            p.map_actions(|node, a| match instants.get(&ActionRef { process: pi, node }) {
                Some(t) => a
                    .clone()
                    .with_interval(TimeInterval::point(t.clone()))
                    .with_environment(BTreeSet::new()),
                None => a.clone(),
            })
        })
        .collect();
    Ok(System::with_qubits(processes, s.qubits().to_vec())?)
}

/// Makes each target instantaneous with an empty environment. Targets without a
/// requested instant get the midpoint of their interval; targeted measurement
/// siblings share the midpoint of [common start, earliest end].
pub fn make_instantaneous(
    s: &System,
    targets: &[ActionId],
    instants: &HashMap<ActionId, Time>,
) -> Result<Transformed, TransformError> {
    let mut chosen: BTreeMap<ActionRef, Time> = BTreeMap::new();
    let refs: Vec<ActionRef> = targets.iter().map(|id| s.locate(id)).collect::<Result<_, _>>()?;
    for (&r, id) in refs.iter().zip(targets) {
        if !s.is_local_ref(r) {
            return Err(TransformError::NotLocal(id.clone()));
        }
    }
    for (id, t) in instants {
        let r = s.locate(id)?;
        if !refs.contains(&r) {
            return Err(TransformError::Precondition(vec![format!("{id} has an instant but is not a target")]));
        }
        if !s.action(r).interval().contains(t) {
            return Err(TransformError::InstantOutside { id: id.clone(), t: t.clone() });
        }
        chosen.insert(r, t.clone());
    }
    for &r in &refs {
        if chosen.contains_key(&r) {
            continue;
        }
        let p = s.process(r.process);
        let group: Vec<usize> = sibling_group(p, r.node)
            .into_iter()
            .filter(|&n| refs.contains(&ActionRef { process: r.process, node: n }))
            .collect();
        let lo = group.iter().map(|&n| p.action(n).interval().lo()).max().expect("group").clone();
        let hi = group.iter().map(|&n| p.action(n).interval().hi()).min().expect("group").clone();
        let t = if lo <= hi { Time::midpoint(&lo, &hi) } else { s.action(r).interval().midpoint() };
        for n in group {
            chosen.entry(ActionRef { process: r.process, node: n }).or_insert_with(|| t.clone());
        }
    }
    Ok(Transformed {
        system: rebuild(s, &chosen)?,
        gamma: Isomorphism::by_ids(s),
    })
}

/// Makes every local action instantaneous at an instant distinct from those of
/// local actions in other processes, so the local actions become atomic.
///
/// Actions are visited by process, then breadth-first. Each gets the first free
/// candidate lo + k(hi − lo)/(K + 1), k = 1..K, where K is one more than the
/// number of other-process instants already placed in its interval. Local
/// measurement siblings are placed together within [start, earliest end].
pub fn atomize(s: &System) -> Result<Transformed, TransformError> {
    let mut problems = Vec::new();
    let report = s.report();
    if !report.ok() {
        problems.extend(report.all_violations());
    }
    if !report.trace_preserving() {
        problems.push("system is not trace-preserving".into());
    }
    if !report.aligned() {
        problems.push("system is not aligned".into());
    }
    for (_, a) in s.actions() {
        if a.interval().is_instant() {
            problems.push(format!("{} has an instantaneous interval", a.id()));
        }
    }
    let local: BTreeSet<ActionRef> = s.local_actions().into_iter().collect();
    for (pi, p) in s.processes().iter().enumerate() {
        for n in p.bfs() {
            let group = sibling_group(p, n);
            let locals = group.iter().filter(|&&k| local.contains(&ActionRef { process: pi, node: k })).count();
            if group[0] == n && locals != 0 && locals != group.len() {
                problems.push(format!(
                    "siblings of {} mix local and non-local actions",
                    p.action(n).id()
                ));
            }
        }
    }
    if !problems.is_empty() {
        return Err(TransformError::Precondition(problems));
    }

    let mut placed: Vec<(usize, Time)> = Vec::new();
    let mut chosen: BTreeMap<ActionRef, Time> = BTreeMap::new();
    for (pi, p) in s.processes().iter().enumerate() {
        for n in p.bfs() {
            let r = ActionRef { process: pi, node: n };
            if !local.contains(&r) || chosen.contains_key(&r) {
                continue;
            }
            let group = sibling_group(p, n);
            let lo = p.action(group[0]).interval().lo().clone();
            let hi = group.iter().map(|&k| p.action(k).interval().hi()).min().expect("group").clone();
            let excluded: Vec<&Time> = placed
                .iter()
                .filter(|(q, t)| *q != pi && &lo <= t && t <= &hi)
                .map(|(_, t)| t)
                .collect();
            let k_max = excluded.len() as i64 + 1;
            let step = (&hi - &lo).div_int(k_max + 1);
            let t = (1..=k_max)
                .map(|k| &lo + &step.mul_int(k))
                .find(|c| !excluded.contains(&c))
                .expect("K candidates against K − 1 exclusions");
            for k in group {
                chosen.insert(ActionRef { process: pi, node: k }, t.clone());
            }
            placed.push((pi, t));
        }
    }
    Ok(Transformed {
        system: rebuild(s, &chosen)?,
        gamma: Isomorphism::by_ids(s),
    })
}
