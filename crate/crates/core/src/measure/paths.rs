use std::collections::BTreeSet;
use std::fmt;

use super::MeasureError;
use crate::model::{ActionId, PartialSystem, Process, System};

/// Default cap on enumerated paths.
pub const DEFAULT_PATH_LIMIT: usize = 1 << 16;

/// One root-to-leaf path per process, in process order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MaximalPath {
    pub paths: Vec<Vec<ActionId>>,
}

impl MaximalPath {
    /// Leaf action of each process.
    pub fn leaves(&self) -> Vec<&ActionId> {
        self.paths.iter().map(|p| p.last().expect("nonempty path")).collect()
    }
}

impl fmt::Display for MaximalPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .paths
            .iter()
            .map(|p| p.iter().map(ActionId::as_str).collect::<Vec<_>>().join("→"))
            .collect();
        f.write_str(&parts.join(" || "))
    }
}

fn product(
    sys: &System,
    per_process: Vec<Vec<Vec<usize>>>,
    limit: usize,
) -> Result<Vec<MaximalPath>, MeasureError> {
    let total = per_process
        .iter()
        .try_fold(1usize, |acc, v| acc.checked_mul(v.len()))
        .unwrap_or(usize::MAX);
    if total > limit {
        return Err(MeasureError::TooManyPaths(limit));
    }
    let mut out = vec![Vec::new()];
    for (pi, choices) in per_process.iter().enumerate() {
        let p = sys.process(pi);
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Vec<ActionId>>| {
                choices.iter().map(move |path| {
                    let mut v = prefix.clone();
                    v.push(path.iter().map(|&n| p.action(n).id().clone()).collect());
                    v
                })
            })
            .collect();
    }
    Ok(out.into_iter().map(|paths| MaximalPath { paths }).collect())
}

/// Every maximal path of the system, in process-list order.
pub fn maximal_paths(s: &System, limit: usize) -> Result<Vec<MaximalPath>, MeasureError> {
    let per: Vec<_> = s.processes().iter().map(|p| p.maximal_paths(p.root())).collect();
    product(s, per, limit)
}

/// ω(C): the maximal paths passing through every anchor of `c`.
pub fn omega(s: &System, c: &PartialSystem, limit: usize) -> Result<BTreeSet<MaximalPath>, MeasureError> {
    c.check_system(s)?;
    let per: Vec<_> = s
        .processes()
        .iter()
        .enumerate()
        .map(|(pi, p)| {
            let a = c.anchor(pi);
            let head = p.path_to(a);
            p.maximal_paths(a)
                .into_iter()
                .map(|tail| {
                    let mut v = head.clone();
                    v.extend(tail.into_iter().skip(1));
                    v
                })
                .collect()
        })
        .collect();
    Ok(product(s, per, limit)?.into_iter().collect())
}

fn check_maximal(p: &Process, path: &[ActionId]) -> Result<Vec<usize>, MeasureError> {
    let nodes: Vec<usize> = path
        .iter()
        .map(|id| p.find(id).ok_or(MeasureError::DifferentProcess))
        .collect::<Result<_, _>>()?;
    let ok = nodes.first() == Some(&p.root())
        && nodes.windows(2).all(|w| p.parent(w[1]) == Some(w[0]))
        && nodes.last().is_some_and(|&n| p.is_leaf(n));
    if !ok {
        return Err(MeasureError::NotMaximal(
            path.iter().map(ActionId::as_str).collect::<Vec<_>>().join("→"),
        ));
    }
    Ok(nodes)
}

/// 2^(−shared prefix length) between two maximal paths of one process, 0 when equal.
pub fn path_distance(p: &Process, a: &[ActionId], b: &[ActionId]) -> Result<f64, MeasureError> {
    let a = check_maximal(p, a)?;
    let b = check_maximal(p, b)?;
    if a == b {
        return Ok(0.0);
    }
    let shared = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    Ok(0.5f64.powi(shared as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{register, QuantumOperation};
    use crate::model::{partial, Action, ActionTree, Anchor, TimeInterval};

    fn act(id: &str, lo: i64, gate: &str) -> Action {
        let op = QuantumOperation::named(gate, register(&["q"])).unwrap();
        let env: Vec<&str> = if gate.starts_with("MEASURE") { vec!["m"] } else { vec![] };
        Action::new(id, TimeInterval::ints(lo, lo + 1).unwrap(), op, env).unwrap()
    }

    fn binary(prefix: &str, lo: i64) -> ActionTree {
        ActionTree::node(
            act(&format!("{prefix}h"), lo, "H"),
            vec![
                ActionTree::leaf(act(&format!("{prefix}0"), lo + 2, "MEASURE_Z(0)")),
                ActionTree::leaf(act(&format!("{prefix}1"), lo + 2, "MEASURE_Z(1)")),
            ],
        )
    }

    fn chain() -> Process {
        Process::chain("C", vec![act("c1", 0, "H"), act("c2", 2, "X")]).unwrap()
    }

    #[test]
    fn counts_multiply_across_processes() {
        let one = System::new(vec![chain()]).unwrap();
        assert_eq!(maximal_paths(&one, 10).unwrap().len(), 1);
        let b = System::new(vec![Process::from_tree("A", binary("a", 0)).unwrap()]).unwrap();
        assert_eq!(maximal_paths(&b, 10).unwrap().len(), 2);
        let three = ActionTree::node(
            act("bh", 0, "H"),
            vec![
                binary("x", 2),
                ActionTree::leaf(act("y", 2, "MEASURE_Z(1)")),
            ],
        );
        let s = System::new(vec![
            Process::from_tree("A", binary("a", 0)).unwrap(),
            Process::from_tree("B", three).unwrap(),
        ])
        .unwrap();
        assert_eq!(maximal_paths(&s, 10).unwrap().len(), 6);
        assert_eq!(maximal_paths(&s, 5), Err(MeasureError::TooManyPaths(5)));
    }

    #[test]
    fn omega_of_anchor_restricts_paths() {
        let s = System::new(vec![Process::from_tree("A", binary("a", 0)).unwrap()]).unwrap();
        let all = omega(&s, &PartialSystem::whole(&s), 10).unwrap();
        assert_eq!(all.len(), 2);
        let c = partial(&s, &[Anchor::At("a1".into())]).unwrap();
        let w = omega(&s, &c, 10).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w.iter().next().unwrap().to_string(), "ah→a1");
    }

    #[test]
    fn distance_follows_shared_prefix() {
        let p = Process::from_tree(
            "A",
            ActionTree::node(act("r", 0, "H"), vec![binary("x", 2), binary("y", 2)]),
        )
        .unwrap();
        let ids = |v: &[&str]| -> Vec<ActionId> { v.iter().map(|&s| s.into()).collect() };
        let a = ids(&["r", "xh", "x0"]);
        assert_eq!(path_distance(&p, &a, &a).unwrap(), 0.0);
        assert_eq!(path_distance(&p, &a, &ids(&["r", "yh", "y0"])).unwrap(), 0.5);
        assert_eq!(path_distance(&p, &a, &ids(&["r", "xh", "x1"])).unwrap(), 0.25);
        assert!(matches!(path_distance(&p, &a, &ids(&["r", "xh"])), Err(MeasureError::NotMaximal(_))));
        assert_eq!(path_distance(&p, &a, &ids(&["c1"])), Err(MeasureError::DifferentProcess));
    }

    #[test]
    fn shared_prefix_of_three() {
        let deep = ActionTree::node(
            act("r", 0, "H"),
            vec![ActionTree::node(act("s", 2, "H"), vec![binary("x", 4)])],
        );
        let p = Process::from_tree("A", deep).unwrap();
        let ids = |v: &[&str]| -> Vec<ActionId> { v.iter().map(|&s| s.into()).collect() };
        let d = path_distance(&p, &ids(&["r", "s", "xh", "x0"]), &ids(&["r", "s", "xh", "x1"])).unwrap();
        assert_eq!(d, 0.125);
    }
}
