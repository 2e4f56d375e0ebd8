use std::collections::BTreeSet;
use std::fmt;

use super::{omega, MeasureError, DEFAULT_PATH_LIMIT};
use crate::model::{children_expansion, ell, PartialSystem, System};

/// A finite disjoint union of events ω(C); no parts means the empty event.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventSet {
    parts: Vec<PartialSystem>,
}

impl EventSet {
    pub const EMPTY: EventSet = EventSet { parts: Vec::new() };

    pub fn single(c: PartialSystem) -> Self {
        Self { parts: vec![c] }
    }

    /// Union of pairwise disjoint events; fails when two overlap.
    pub fn disjoint_union(s: &System, parts: Vec<PartialSystem>) -> Result<Self, MeasureError> {
        for (i, c) in parts.iter().enumerate() {
            c.check_system(s)?;
            if parts[..i].iter().any(|d| !disjoint(s, c, d)) {
                return Err(MeasureError::Refinement("events overlap".into()));
            }
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[PartialSystem] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn display<'a>(&'a self, s: &'a System) -> impl fmt::Display + 'a {
        DisplayEvent { e: self, s }
    }
}

struct DisplayEvent<'a> {
    e: &'a EventSet,
    s: &'a System,
}

impl fmt::Display for DisplayEvent<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.e.parts.is_empty() {
            return f.write_str("∅");
        }
        for (i, c) in self.e.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(" ⊎ ")?;
            }
            write!(f, "ω({})", c.display(self.s))?;
        }
        Ok(())
    }
}

/// ω(C) ∩ ω(D) = ∅ exactly when some process has →*-incomparable anchors.
pub fn disjoint(s: &System, c: &PartialSystem, d: &PartialSystem) -> bool {
    (0..s.processes().len()).any(|pi| {
        let p = s.process(pi);
        let (a, b) = (c.anchor(pi), d.anchor(pi));
        !p.precedes_or_eq(a, b) && !p.precedes_or_eq(b, a)
    })
}

/// Refinements `x` of {C} and `y` of {D} that both contain `common`, with ω(common) = ω(C) ∩ ω(D).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Intersection {
    pub x: Vec<PartialSystem>,
    pub y: Vec<PartialSystem>,
    pub common: Option<PartialSystem>,
}

/// Refines the partial in `set` that contains `target` one step toward it.
/// Returns false once that partial equals `target`.
fn refine_toward(s: &System, set: &mut Vec<PartialSystem>, target: &PartialSystem) -> Result<bool, MeasureError> {
    let i = set
        .iter()
        .position(|c| !disjoint(s, c, target))
        .ok_or_else(|| MeasureError::Refinement("no partial contains the target".into()))?;
    if &set[i] == target {
        return Ok(false);
    }
    let c = set.remove(i);
    let pi = (0..s.processes().len())
        .find(|&pi| c.anchor(pi) != target.anchor(pi))
        .expect("partials differ in some anchor");
    set.extend(children_expansion(s, &c, pi)?);
    Ok(true)
}

pub fn intersect(s: &System, c: &PartialSystem, d: &PartialSystem) -> Result<Intersection, MeasureError> {
    c.check_system(s)?;
    d.check_system(s)?;
    if disjoint(s, c, d) {
        return Ok(Intersection {
            x: vec![c.clone()],
            y: vec![d.clone()],
            common: None,
        });
    }
    // The deeper anchor of each comparable pair.
    let nodes: Vec<usize> = (0..s.processes().len())
        .map(|pi| {
            let (a, b) = (c.anchor(pi), d.anchor(pi));
            if s.process(pi).precedes_or_eq(a, b) { b } else { a }
        })
        .collect();
    let e = PartialSystem::from_nodes(s, &nodes)?;
    let mut x = vec![c.clone()];
    let mut y = vec![d.clone()];
    while refine_toward(s, &mut x, &e)? {}
    while refine_toward(s, &mut y, &e)? {}
    Ok(Intersection { x, y, common: Some(e) })
}

pub fn intersection(s: &System, x: &EventSet, y: &EventSet) -> Result<EventSet, MeasureError> {
    let mut parts = Vec::new();
    for c in &x.parts {
        for d in &y.parts {
            if let Some(e) = intersect(s, c, d)?.common {
                parts.push(e);
            }
        }
    }
    Ok(EventSet { parts })
}

/// ω(C) − ω(D) as a disjoint list: the refinement of {C} toward their intersection, minus it.
fn minus(s: &System, c: &PartialSystem, d: &PartialSystem) -> Result<Vec<PartialSystem>, MeasureError> {
    let r = intersect(s, c, d)?;
    Ok(match r.common {
        None => vec![c.clone()],
        Some(e) => r.x.into_iter().filter(|p| p != &e).collect(),
    })
}

pub fn difference(s: &System, x: &EventSet, y: &EventSet) -> Result<EventSet, MeasureError> {
    let mut parts = Vec::new();
    for c in &x.parts {
        let mut rest = vec![c.clone()];
        for d in &y.parts {
            let mut next = Vec::new();
            for r in &rest {
                next.extend(minus(s, r, d)?);
            }
            rest = next;
        }
        parts.extend(rest);
    }
    Ok(EventSet { parts })
}

/// Bound on refinement steps in `common_refinement`.
const MAX_REFINEMENT_STEPS: usize = 1 << 20;

/// A common refinement Z of two disjoint families covering the same paths.
pub fn common_refinement(
    s: &System,
    x: &[PartialSystem],
    y: &[PartialSystem],
) -> Result<Vec<PartialSystem>, MeasureError> {
    if cfg!(debug_assertions) {
        let cover = |v: &[PartialSystem]| -> Result<Option<BTreeSet<_>>, MeasureError> {
            let mut all = BTreeSet::new();
            for c in v {
                match omega(s, c, DEFAULT_PATH_LIMIT) {
                    Ok(w) => all.extend(w),
                    Err(MeasureError::TooManyPaths(_)) => return Ok(None),
                    Err(e) => return Err(e),
                }
            }
            Ok(Some(all))
        };
        if let (Some(a), Some(b)) = (cover(x)?, cover(y)?) {
            if a != b {
                return Err(MeasureError::Refinement("families cover different paths".into()));
            }
        }
    }
    let mut w: Vec<PartialSystem> = x.to_vec();
    let mut z: Vec<PartialSystem> = y.to_vec();
    for _ in 0..MAX_REFINEMENT_STEPS {
        let pair = w.iter().enumerate().find_map(|(i, c)| {
            z.iter()
                .position(|d| d != c && !disjoint(s, c, d))
                .map(|j| (i, j))
        });
        let Some((i, j)) = pair else {
            w.sort();
            z.sort();
            return if w == z {
                Ok(z)
            } else {
                Err(MeasureError::Refinement("families cover different paths".into()))
            };
        };
        let c = w.remove(i);
        let d = z.remove(j);
        let r = intersect(s, &c, &d)?;
        w.extend(r.x);
        z.extend(r.y);
    }
    Err(MeasureError::Refinement("refinement did not terminate".into()))
}

/// Largest ℓ in a family.
pub fn max_ell(s: &System, v: &[PartialSystem]) -> usize {
    v.iter().map(|c| ell(s, c)).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{random_system, RandomSystemConfig};
    use crate::linalg::{register, QuantumOperation};
    use crate::model::{all_partials, partial, Action, ActionTree, Anchor, Process, TimeInterval};
    use proptest::prelude::*;

    fn act(id: &str, q: &str, lo: i64, gate: &str) -> Action {
        let op = QuantumOperation::named(gate, register(&[q])).unwrap();
        let env: Vec<String> = if gate.starts_with("MEASURE") { vec![format!("m_{q}")] } else { vec![] };
        Action::new(id, TimeInterval::ints(lo, lo + 1).unwrap(), op, env).unwrap()
    }

    /// h → {m0, m1}, m1 → x → {n0, n1}.
    fn deep(prefix: &str, q: &str) -> Process {
        let id = |s: &str| format!("{prefix}{s}");
        Process::from_tree(
            prefix,
            ActionTree::node(
                act(&id("h"), q, 0, "H"),
                vec![
                    ActionTree::leaf(act(&id("m0"), q, 2, "MEASURE_Z(0)")),
                    ActionTree::node(
                        act(&id("m1"), q, 2, "MEASURE_Z(1)"),
                        vec![ActionTree::node(
                            act(&id("x"), q, 4, "H"),
                            vec![
                                ActionTree::leaf(act(&id("n0"), q, 6, "MEASURE_Z(0)")),
                                ActionTree::leaf(act(&id("n1"), q, 6, "MEASURE_Z(1)")),
                            ],
                        )],
                    ),
                ],
            ),
        )
        .unwrap()
    }

    fn sys() -> System {
        System::new(vec![deep("A", "a"), deep("B", "b")]).unwrap()
    }

    fn p(s: &System, a: &str, b: &str) -> PartialSystem {
        let anchor = |x: &str| if x == "*" { Anchor::Whole } else { Anchor::At(x.into()) };
        partial(s, &[anchor(a), anchor(b)]).unwrap()
    }

    fn paths(s: &System, v: &[PartialSystem]) -> BTreeSet<crate::measure::MaximalPath> {
        v.iter().flat_map(|c| omega(s, c, 1000).unwrap()).collect()
    }

    #[test]
    fn intersect_identical_and_nested() {
        let s = sys();
        let c = p(&s, "Am1", "*");
        let r = intersect(&s, &c, &c).unwrap();
        assert_eq!(r.common, Some(c.clone()));
        assert_eq!(r.x, vec![c.clone()]);
        let d = p(&s, "An0", "*");
        let r = intersect(&s, &c, &d).unwrap();
        assert_eq!(r.common, Some(d.clone()));
        assert_eq!(r.y, vec![d.clone()]);
        assert_eq!(paths(&s, &r.x), paths(&s, &[c]));
    }

    #[test]
    fn sibling_anchors_are_disjoint() {
        let s = sys();
        let r = intersect(&s, &p(&s, "Am0", "*"), &p(&s, "Am1", "*")).unwrap();
        assert_eq!(r.common, None);
    }

    #[test]
    fn crossed_anchors_meet_in_both_processes() {
        let s = sys();
        let c = p(&s, "An1", "*");
        let d = p(&s, "*", "Bm0");
        let r = intersect(&s, &c, &d).unwrap();
        let e = r.common.clone().unwrap();
        assert_eq!(e, p(&s, "An1", "Bm0"));
        let want: BTreeSet<_> = omega(&s, &c, 100).unwrap().intersection(&omega(&s, &d, 100).unwrap()).cloned().collect();
        assert_eq!(omega(&s, &e, 100).unwrap(), want);
        assert_eq!(paths(&s, &r.x), omega(&s, &c, 100).unwrap());
        assert!(r.x.contains(&e) && r.y.contains(&e));
    }

    #[test]
    fn differences() {
        let s = sys();
        let x = EventSet::single(p(&s, "Am1", "*"));
        assert!(difference(&s, &x, &x).unwrap().is_empty());
        let y = EventSet::single(p(&s, "An0", "*"));
        let d = difference(&s, &x, &y).unwrap();
        assert_eq!(d.parts(), &[p(&s, "An1", "*")]);
        let z = EventSet::single(p(&s, "Am0", "*"));
        assert_eq!(difference(&s, &x, &z).unwrap(), x);
    }

    #[test]
    fn common_refinement_cases() {
        let s = sys();
        let x = vec![p(&s, "Am1", "*")];
        assert_eq!(common_refinement(&s, &x, &x).unwrap(), x);
        let y = children_expansion(&s, &x[0], 0).unwrap();
        let r = common_refinement(&s, &x, &y).unwrap();
        assert_eq!(r, y);
        // Crossed: split A first on one side and B first on the other.
        let left = children_expansion(&s, &PartialSystem::whole(&s), 0).unwrap();
        let right = children_expansion(&s, &PartialSystem::whole(&s), 1).unwrap();
        let z = common_refinement(&s, &left, &right).unwrap();
        assert_eq!(z.len(), 4);
        assert_eq!(paths(&s, &z), paths(&s, &[PartialSystem::whole(&s)]));
        assert!(max_ell(&s, &z) <= 1);
        assert!(common_refinement(&s, &left, &[p(&s, "Am0", "*")]).is_err());
    }

    #[test]
    fn disjoint_union_rejects_overlap() {
        let s = sys();
        assert!(EventSet::disjoint_union(&s, vec![p(&s, "Am0", "*"), p(&s, "Am1", "*")]).is_ok());
        assert!(EventSet::disjoint_union(&s, vec![p(&s, "Am1", "*"), p(&s, "An1", "*")]).is_err());
        assert_eq!(EventSet::EMPTY.display(&s).to_string(), "∅");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn semiring_operations_match_path_sets(seed in 0u64..10_000, i in 0usize..64, j in 0usize..64) {
            let s = random_system(&RandomSystemConfig::default(), seed);
            let all = all_partials(&s, None);
            let (c, d) = (&all[i % all.len()], &all[j % all.len()]);
            let wc = omega(&s, c, 1000).unwrap();
            let wd = omega(&s, d, 1000).unwrap();
            let r = intersect(&s, c, d).unwrap();
            let want: BTreeSet<_> = wc.intersection(&wd).cloned().collect();
            let got = r.common.as_ref().map(|e| omega(&s, e, 1000).unwrap()).unwrap_or_default();
            prop_assert_eq!(&got, &want);
            prop_assert_eq!(disjoint(&s, c, d), want.is_empty());
            prop_assert_eq!(paths(&s, &r.x), wc.clone());
            prop_assert_eq!(paths(&s, &r.y), wd.clone());
            let diff = difference(&s, &EventSet::single(c.clone()), &EventSet::single(d.clone())).unwrap();
            prop_assert!(EventSet::disjoint_union(&s, diff.parts().to_vec()).is_ok());
            let want: BTreeSet<_> = wc.difference(&wd).cloned().collect();
            prop_assert_eq!(paths(&s, diff.parts()), want);
        }
    }
}
