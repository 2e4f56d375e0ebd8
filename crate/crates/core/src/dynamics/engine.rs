use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, RwLock};

use super::{DynamicsError, Schedule};
use crate::linalg::{apply_embedded, ComplexMatrix, DensityOperator, QubitId};
use crate::model::{children_expansion, ActionId, ActionRef, PartialSystem, System, Time};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AppliedEvent {
    /// Index of the branch-free component the event belongs to.
    pub branch: usize,
    pub action: ActionId,
    pub tau: Time,
}

/// ⟦C⟧(t)(ρ) together with what produced it.
#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub state: DensityOperator,
    pub applied: Vec<AppliedEvent>,
    pub warnings: Vec<String>,
    /// Number of branch-free components summed.
    pub branches: usize,
}

/// A system dynamics: the map ⟦C⟧(t) plus its restriction to time windows
/// and process subsets, which the axiom checker needs.
pub trait Dynamics: Sync {
    fn name(&self) -> String;

    /// ⟦C⟧(t)(ρ).
    fn evolve(
        &self,
        sys: &System,
        c: &PartialSystem,
        sched: &Schedule,
        t: &Time,
        rho: &DensityOperator,
    ) -> Result<EvolutionResult, DynamicsError>;

    /// The operation ℱ that the actions of processes `procs` perform during
    /// [x, y], applied to `rho`. Meaningful when C has no branching before `x`.
    #[allow(clippy::too_many_arguments)]
    fn window(
        &self,
        sys: &System,
        c: &PartialSystem,
        sched: &Schedule,
        procs: &[usize],
        x: &Time,
        y: &Time,
        rho: &DensityOperator,
    ) -> Result<EvolutionResult, DynamicsError>;
}

/// Each action's whole effect lands at its scheduled instant τ(a).
///
/// A branching takes effect once all of its branches' instants have passed;
/// from then on the state is the sum over branches. Events with equal instants
/// are ordered by process priority (list order unless overridden), then id.
#[derive(Default)]
pub struct AtomicDynamics {
    priority: Option<Vec<usize>>,
    skip: Option<ActionId>,
    kraus_cache: RwLock<HashMap<(u64, ActionRef, Vec<QubitId>), Arc<Vec<ComplexMatrix>>>>,
}

impl AtomicDynamics {
    pub fn new() -> Self {
        Self::default()
    }

    /// Breaks same-instant ties by the given process order instead of list order.
    pub fn with_priority(priority: Vec<usize>) -> Self {
        Self {
            priority: Some(priority),
            ..Self::default()
        }
    }

    /// Negative control for the axiom checker: silently drops one action.
    pub fn skipping(action: ActionId) -> Self {
        Self {
            skip: Some(action),
            ..Self::default()
        }
    }

    fn rank(&self, process: usize) -> usize {
        match &self.priority {
            Some(p) => p.iter().position(|&x| x == process).unwrap_or(usize::MAX),
            None => process,
        }
    }

    fn kraus(
        &self,
        sys: &System,
        r: ActionRef,
        register: &[QubitId],
    ) -> Result<Arc<Vec<ComplexMatrix>>, DynamicsError> {
        let key = (sys.fingerprint(), r, register.to_vec());
        if let Some(k) = self.kraus_cache.read().expect("cache lock").get(&key) {
            return Ok(k.clone());
        }
        let k = Arc::new(sys.action(r).operation().embedded_kraus(register)?);
        self.kraus_cache
            .write()
            .expect("cache lock")
            .insert(key, k.clone());
        Ok(k)
    }

    /// Splits `c` into components in which no branching among `procs` has fully taken effect by `t`.
    fn components(
        &self,
        sys: &System,
        c: &PartialSystem,
        sched: &Schedule,
        procs: &[usize],
        t: &Time,
    ) -> Result<Vec<PartialSystem>, DynamicsError> {
        let mut out = Vec::new();
        let mut stack = vec![c.clone()];
        while let Some(d) = stack.pop() {
            let mut expanded = false;
            if !t.is_zero() {
                for &pi in procs {
                    let Some(x) = d.branch_point(sys, pi) else { continue };
                    let p = sys.process(pi);
                    let mut done = true;
                    for &k in p.children(x) {
                        if sched.tau_of(sys, ActionRef { process: pi, node: k })? > t {
                            done = false;
                            break;
                        }
                    }
                    if done {
                        let mut kids = children_expansion(sys, &d, pi)?;
                        kids.reverse();
                        stack.extend(kids);
                        expanded = true;
                        break;
                    }
                }
            }
            if !expanded {
                out.push(d);
            }
        }
        Ok(out)
    }

    /// Applies, in instant order, the chain actions of `procs` whose instant lies in `[lo, hi]`.
    #[allow(clippy::too_many_arguments)]
    fn apply_chain(
        &self,
        sys: &System,
        d: &PartialSystem,
        sched: &Schedule,
        procs: &[usize],
        lo: Option<&Time>,
        hi: &Time,
        rho: &DensityOperator,
        branch: usize,
        applied: &mut Vec<AppliedEvent>,
        warnings: &mut BTreeSet<String>,
    ) -> Result<DensityOperator, DynamicsError> {
        let mut events = Vec::new();
        if !hi.is_zero() {
            for &pi in procs {
                for node in chain(sys, d, pi) {
                    let r = ActionRef { process: pi, node };
                    let tau = sched.tau_of(sys, r)?;
                    if tau <= hi && lo.is_none_or(|l| tau >= l) {
                        events.push((tau.clone(), self.rank(pi), sys.action(r).id().clone(), r));
                    }
                }
            }
        }
        events.sort();
        for w in events.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.0 == b.0 && a.3.process != b.3.process && sys.action(a.3).shares_qubit(sys.action(b.3)) {
                warnings.insert(format!(
                    "{} and {} act on a shared qubit at the same instant {}; applied as {} then {}",
                    a.2, b.2, a.0, a.2, b.2
                ));
            }
        }
        let mut state = rho.clone();
        for (tau, _, id, r) in events {
            if self.skip.as_ref() == Some(&id) {
                continue;
            }
            state = apply_embedded(&self.kraus(sys, r, rho.register())?, &state);
            applied.push(AppliedEvent {
                branch,
                action: id,
                tau,
            });
        }
        Ok(state)
    }

    #[allow(clippy::too_many_arguments)]
    fn run(
        &self,
        sys: &System,
        c: &PartialSystem,
        sched: &Schedule,
        procs: &[usize],
        lo: Option<&Time>,
        hi: &Time,
        rho: &DensityOperator,
    ) -> Result<EvolutionResult, DynamicsError> {
        check_inputs(sys, c, rho)?;
        let comps = self.components(sys, c, sched, procs, hi)?;
        let mut applied = Vec::new();
        let mut warnings = BTreeSet::new();
        let mut total = DensityOperator::zero(rho.register().to_vec());
        for (i, d) in comps.iter().enumerate() {
            let s = self.apply_chain(sys, d, sched, procs, lo, hi, rho, i, &mut applied, &mut warnings)?;
            total = total.add(&s)?;
        }
        Ok(EvolutionResult {
            state: total,
            applied,
            warnings: warnings.into_iter().collect(),
            branches: comps.len(),
        })
    }
}

impl Dynamics for AtomicDynamics {
    fn name(&self) -> String {
        match &self.skip {
            Some(id) => format!("atomic (skipping {id})"),
            None => "atomic".into(),
        }
    }

    fn evolve(
        &self,
        sys: &System,
        c: &PartialSystem,
        sched: &Schedule,
        t: &Time,
        rho: &DensityOperator,
    ) -> Result<EvolutionResult, DynamicsError> {
        let all: Vec<usize> = (0..sys.processes().len()).collect();
        self.run(sys, c, sched, &all, None, t, rho)
    }

    fn window(
        &self,
        sys: &System,
        c: &PartialSystem,
        sched: &Schedule,
        procs: &[usize],
        x: &Time,
        y: &Time,
        rho: &DensityOperator,
    ) -> Result<EvolutionResult, DynamicsError> {
        self.run(sys, c, sched, procs, Some(x), y, rho)
    }
}

fn check_inputs(sys: &System, c: &PartialSystem, rho: &DensityOperator) -> Result<(), DynamicsError> {
    c.check_system(sys)?;
    sys.require_trace_preserving()?;
    if let Some(q) = sys.qubits().iter().find(|q| !rho.register().contains(q)) {
        return Err(DynamicsError::Register(format!("state has no qubit {q}")));
    }
    Ok(())
}

/// Nodes of one process that a component can apply: the root path to the
/// anchor and the branch-free chain below it, down to the first branching node.
fn chain(sys: &System, d: &PartialSystem, pi: usize) -> Vec<usize> {
    let p = sys.process(pi);
    let mut out = p.path_to(d.anchor(pi));
    let mut cur = d.anchor(pi);
    while let [only] = p.children(cur) {
        out.push(*only);
        cur = *only;
    }
    out
}

/// First process whose induced actions branch within [0, t], with its branching node.
fn interval_branching(sys: &System, d: &PartialSystem, t: &Time) -> Option<usize> {
    (0..sys.processes().len()).find(|&pi| {
        d.branch_point(sys, pi).is_some_and(|x| {
            let p = sys.process(pi);
            p.children(x).iter().any(|&k| p.action(k).interval().lo() <= t)
        })
    })
}

/// Refines `c` by child expansion until no component branches within [0, t].
pub fn branch_free_prefix_decomposition(
    s: &System,
    c: &PartialSystem,
    t: &Time,
) -> Result<Vec<PartialSystem>, DynamicsError> {
    c.check_system(s)?;
    s.require_trace_preserving()?;
    let mut out = Vec::new();
    let mut stack = vec![c.clone()];
    while let Some(d) = stack.pop() {
        match interval_branching(s, &d, t) {
            Some(pi) => {
                let mut kids = children_expansion(s, &d, pi)?;
                kids.reverse();
                stack.extend(kids);
            }
            None => out.push(d),
        }
    }
    Ok(out)
}

/// Applies the actions of a partial system that does not branch within [0, t].
pub fn evolve_branch_free(
    s: &System,
    d: &PartialSystem,
    sched: &Schedule,
    t: &Time,
    rho: &DensityOperator,
) -> Result<EvolutionResult, DynamicsError> {
    check_inputs(s, d, rho)?;
    if let Some(pi) = interval_branching(s, d, t) {
        return Err(DynamicsError::NotBranchFree(format!(
            "process {} branches before {t}",
            s.process(pi).name()
        )));
    }
    let engine = AtomicDynamics::new();
    let all: Vec<usize> = (0..s.processes().len()).collect();
    let mut applied = Vec::new();
    let mut warnings = BTreeSet::new();
    let state = engine.apply_chain(s, d, sched, &all, None, t, rho, 0, &mut applied, &mut warnings)?;
    Ok(EvolutionResult {
        state,
        applied,
        warnings: warnings.into_iter().collect(),
        branches: 1,
    })
}

/// ⟦C⟧(t)(ρ) under the default atomic dynamics.
pub fn evolve(
    s: &System,
    c: &PartialSystem,
    sched: &Schedule,
    t: &Time,
    rho: &DensityOperator,
) -> Result<EvolutionResult, DynamicsError> {
    AtomicDynamics::new().evolve(s, c, sched, t, rho)
}

/// Outcome of running every tie-break order of the processes.
#[derive(Clone, Debug)]
pub struct TieEnumeration {
    pub orders: Vec<(Vec<usize>, DensityOperator)>,
    /// Largest max-entry distance between any two orders' results.
    pub divergence: f64,
    pub warnings: Vec<String>,
}

/// Largest number of processes whose priority orders are enumerated.
pub const MAX_TIE_PROCESSES: usize = 6;

pub fn enumerate_tie_orders(
    s: &System,
    c: &PartialSystem,
    sched: &Schedule,
    t: &Time,
    rho: &DensityOperator,
) -> Result<TieEnumeration, DynamicsError> {
    let n = s.processes().len();
    if n > MAX_TIE_PROCESSES {
        return Err(DynamicsError::TooManyProcesses(n));
    }
    let mut orders = Vec::new();
    let mut warnings = BTreeSet::new();
    for perm in permutations(n) {
        let r = AtomicDynamics::with_priority(perm.clone()).evolve(s, c, sched, t, rho)?;
        warnings.extend(r.warnings);
        orders.push((perm, r.state));
    }
    let mut divergence: f64 = 0.0;
    for i in 0..orders.len() {
        for j in i + 1..orders.len() {
            divergence = divergence.max(orders[i].1.max_abs_diff(&orders[j].1));
        }
    }
    Ok(TieEnumeration {
        orders,
        divergence,
        warnings: warnings.into_iter().collect(),
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}
