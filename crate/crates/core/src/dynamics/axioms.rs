use std::fmt;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dynamics, DynamicsError, Schedule};
use crate::linalg::random::{random_density, random_pure_state};
use crate::linalg::{apply, trace, DensityOperator, QubitId, EQ_TOL, VALIDITY_TOL};
use crate::model::{
    all_partials, children_expansion, is_trace_preserving_after, PartialSystem, System, Time,
};

#[derive(Clone, Debug)]
pub struct AxiomConfig {
    /// Partial systems sampled per system (all of them when there are fewer).
    pub max_partials: usize,
    /// Random input states besides |0…0⟩.
    pub random_states: usize,
    /// Time pairs (x, y) sampled per partial system for the evolution checks.
    pub window_pairs: usize,
    pub seed: u64,
}

impl Default for AxiomConfig {
    fn default() -> Self {
        Self {
            max_partials: 24,
            random_states: 2,
            window_pairs: 12,
            seed: 0,
        }
    }
}

/// Outcome of checking one condition.
#[derive(Clone, Debug, Default)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Number of individual comparisons made.
    pub checked: usize,
    pub max_deviation: f64,
    pub failures: Vec<String>,
}

/// Failure messages kept per check.
const MAX_FAILURES: usize = 8;

impl AxiomCheck {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            passed: true,
            ..Self::default()
        }
    }

    fn record(&mut self, deviation: f64, tol: f64, what: impl FnOnce() -> String) {
        self.checked += 1;
        self.max_deviation = self.max_deviation.max(deviation);
        if !(deviation <= tol) {
            self.passed = false;
            if self.failures.len() < MAX_FAILURES {
                self.failures.push(format!("{} (deviation {deviation:.3e})", what()));
            }
        }
    }
}

impl fmt::Display for AxiomCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<10} {} checked={} max_dev={:.3e}",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.checked,
            self.max_deviation
        )?;
        for m in &self.failures {
            write!(f, "\n    {m}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub dynamics: String,
    pub initial: AxiomCheck,
    pub branching: AxiomCheck,
    pub evolution: AxiomCheck,
    pub trace: AxiomCheck,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.checks().iter().all(|c| c.passed)
    }

    pub fn checks(&self) -> [&AxiomCheck; 4] {
        [&self.initial, &self.branching, &self.evolution, &self.trace]
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dynamics: {}", self.dynamics)?;
        for c in self.checks() {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// d² pure states whose projectors span all operators on `register`:
/// |i⟩, (|i⟩+|j⟩)/√2 and (|i⟩+i|j⟩)/√2.
pub fn spanning_states(register: &[QubitId]) -> Vec<DensityOperator> {
    let d = 1usize << register.len();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    let state = |amps: Vec<Complex64>| DensityOperator::pure(register.to_vec(), &amps).expect("unit vector");
    for i in 0..d {
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        v[i] = Complex64::new(1.0, 0.0);
        out.push(state(v));
    }
    for i in 0..d {
        for j in i + 1..d {
            for phase in [Complex64::new(s, 0.0), Complex64::new(0.0, s)] {
                let mut v = vec![Complex64::new(0.0, 0.0); d];
                v[i] = Complex64::new(s, 0.0);
                v[j] = phase;
                out.push(state(v));
            }
        }
    }
    out
}

/// Sorted instants where something can change: 0, every τ and every interval endpoint.
fn breakpoints(sys: &System, sched: &Schedule) -> Vec<Time> {
    let mut v = sched.instants();
    v.push(Time::zero());
    for (_, a) in sys.actions() {
        v.push(a.interval().lo().clone());
        v.push(a.interval().hi().clone());
    }
    v.sort();
    v.dedup();
    v
}

/// Breakpoints with their ±ε neighbours, where ε is a thousandth of the smallest gap.
fn probe_grid(points: &[Time]) -> (Vec<Time>, Time) {
    let gap = points
        .windows(2)
        .map(|w| &w[1] - &w[0])
        .min()
        .unwrap_or_else(|| Time::int(1));
    let eps = gap.div_int(1000);
    let mut grid = Vec::new();
    for p in points {
        if p >= &eps {
            grid.push(p - &eps);
        }
        grid.push(p.clone());
        grid.push(p + &eps);
    }
    if let Some(last) = points.last() {
        grid.push(last + &Time::int(1));
    }
    grid.sort();
    grid.dedup();
    (grid, eps)
}

/// Whether some induced branching of `c` has a branch starting before `x`.
fn branches_before(sys: &System, c: &PartialSystem, x: &Time) -> bool {
    (0..sys.processes().len()).any(|pi| {
        c.branch_point(sys, pi).is_some_and(|b| {
            let p = sys.process(pi);
            p.children(b).iter().any(|&k| p.action(k).interval().lo() < x)
        })
    })
}

/// Nodes of process `pi` that `c` applies without branching: root path, anchor and its single-child chain.
fn chain_nodes(sys: &System, c: &PartialSystem, pi: usize) -> Vec<usize> {
    let p = sys.process(pi);
    let mut out = p.path_to(c.anchor(pi));
    let mut cur = c.anchor(pi);
    while let [only] = p.children(cur) {
        out.push(*only);
        cur = *only;
    }
    out
}

struct Ctx<'a> {
    dynamics: &'a dyn Dynamics,
    sys: &'a System,
    sched: &'a Schedule,
    states: Vec<DensityOperator>,
    grid: Vec<Time>,
    points: Vec<Time>,
    eps: Time,
}

impl Ctx<'_> {
    fn evolve(&self, c: &PartialSystem, t: &Time, rho: &DensityOperator) -> Result<DensityOperator, DynamicsError> {
        Ok(self.dynamics.evolve(self.sys, c, self.sched, t, rho)?.state)
    }

    fn window(
        &self,
        c: &PartialSystem,
        procs: &[usize],
        x: &Time,
        y: &Time,
        rho: &DensityOperator,
    ) -> Result<DensityOperator, DynamicsError> {
        Ok(self.dynamics.window(self.sys, c, self.sched, procs, x, y, rho)?.state)
    }

    /// ⟦C⟧(x−)(ρ), with ⟦C⟧(0−) taken as the identity.
    fn before(&self, c: &PartialSystem, x: &Time, rho: &DensityOperator) -> Result<DensityOperator, DynamicsError> {
        if x.is_zero() {
            return Ok(rho.clone());
        }
        let half = self.eps.div_int(2);
        let t = if x > &half { x - &half } else { Time::zero() };
        self.evolve(c, &t, rho)
    }
}

/// Checks the four dynamics conditions on sampled partial systems, states and times.
pub fn check_dynamics_axioms(
    dynamics: &dyn Dynamics,
    sys: &System,
    sched: &Schedule,
    cfg: &AxiomConfig,
) -> Result<AxiomReport, DynamicsError> {
    sys.require_trace_preserving()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let reg = sys.qubits().to_vec();
    let mut states = vec![DensityOperator::basis(reg.clone(), 0)?];
    for k in 0..cfg.random_states {
        states.push(if k % 2 == 0 {
            random_pure_state(reg.clone(), &mut rng)
        } else {
            random_density(reg.clone(), 2, &mut rng)
        });
    }
    let mut partials = all_partials(sys, None);
    if partials.len() > cfg.max_partials {
        let whole = partials[0].clone();
        partials[1..].shuffle(&mut rng);
        partials.truncate(cfg.max_partials.max(1));
        partials[0] = whole;
        partials.sort();
    }
    let points = breakpoints(sys, sched);
    let (grid, eps) = probe_grid(&points);
    let ctx = Ctx {
        dynamics,
        sys,
        sched,
        states,
        grid,
        points,
        eps,
    };

    let mut initial = AxiomCheck::new("initial");
    let mut branching = AxiomCheck::new("branching");
    let mut evolution = AxiomCheck::new("evolution");
    let mut trace_check = AxiomCheck::new("trace");
    for c in &partials {
        check_initial(&ctx, c, &mut initial)?;
        check_branching(&ctx, c, &mut branching)?;
        check_evolution(&ctx, c, cfg, &mut rng, &mut evolution)?;
        check_trace(&ctx, c, &mut trace_check)?;
    }
    Ok(AxiomReport {
        dynamics: dynamics.name(),
        initial,
        branching,
        evolution,
        trace: trace_check,
    })
}

fn check_initial(ctx: &Ctx, c: &PartialSystem, out: &mut AxiomCheck) -> Result<(), DynamicsError> {
    for rho in &ctx.states {
        let got = ctx.evolve(c, &Time::zero(), rho)?;
        out.record(got.max_abs_diff(rho), EQ_TOL, || {
            format!("⟦{}⟧(0) differs from the identity", c.display(ctx.sys))
        });
    }
    Ok(())
}

fn check_branching(ctx: &Ctx, c: &PartialSystem, out: &mut AxiomCheck) -> Result<(), DynamicsError> {
    let sys = ctx.sys;
    for pi in 0..sys.processes().len() {
        let Some(b) = c.branch_point(sys, pi) else { continue };
        let p = sys.process(pi);
        let done = p
            .children(b)
            .iter()
            .map(|&k| p.action(k).interval().hi().clone())
            .max()
            .expect("branching node has children");
        let kids = children_expansion(sys, c, pi)?;
        for t in ctx.grid.iter().filter(|t| *t >= &done) {
            for rho in &ctx.states {
                let whole = ctx.evolve(c, t, rho)?;
                let mut sum = DensityOperator::zero(rho.register().to_vec());
                for k in &kids {
                    sum = sum.add(&ctx.evolve(k, t, rho)?)?;
                }
                out.record(whole.max_abs_diff(&sum), EQ_TOL, || {
                    format!(
                        "⟦{}⟧({t}) differs from the sum over children of {}",
                        c.display(sys),
                        p.action(b).id()
                    )
                });
            }
        }
    }
    Ok(())
}

/// Qubits touched by induced actions of `pi` whose interval meets [x, y].
fn window_qubits(sys: &System, c: &PartialSystem, pi: usize, x: &Time, y: &Time) -> Vec<QubitId> {
    let p = sys.process(pi);
    let mut q: Vec<QubitId> = c
        .induced(sys, pi)
        .into_iter()
        .map(|n| p.action(n))
        .filter(|a| a.interval().lo() <= y && x <= a.interval().hi())
        .flat_map(|a| a.register().to_vec())
        .collect();
    q.sort();
    q.dedup();
    q
}

fn check_evolution<R: Rng>(
    ctx: &Ctx,
    c: &PartialSystem,
    cfg: &AxiomConfig,
    rng: &mut R,
    out: &mut AxiomCheck,
) -> Result<(), DynamicsError> {
    let sys = ctx.sys;
    let n = sys.processes().len();
    let all: Vec<usize> = (0..n).collect();

    let mut pairs = Vec::new();
    for (i, x) in ctx.points.iter().enumerate() {
        if branches_before(sys, c, x) {
            break;
        }
        for y in &ctx.points[i..] {
            pairs.push((x.clone(), y.clone()));
        }
    }
    pairs.shuffle(rng);
    pairs.truncate(cfg.window_pairs);

    let product: Vec<DensityOperator> = {
        let mut rho: Option<DensityOperator> = None;
        for q in sys.qubits() {
            let s = random_pure_state(vec![q.clone()], rng);
            rho = Some(match rho {
                None => s,
                Some(r) => r.tensor(&s)?,
            });
        }
        rho.into_iter().collect()
    };

    for (x, y) in &pairs {
        for rho in &ctx.states {
            let direct = ctx.evolve(c, y, rho)?;
            let stepped = ctx.window(c, &all, x, y, &ctx.before(c, x, rho)?)?;
            out.record(direct.max_abs_diff(&stepped), EQ_TOL, || {
                format!("⟦{}⟧({y}) differs from the window [{x}, {y}] applied after {x}", c.display(sys))
            });
        }
        for p1 in 0..n {
            for p2 in p1 + 1..n {
                let q1 = window_qubits(sys, c, p1, x, y);
                let q2 = window_qubits(sys, c, p2, x, y);
                if q1.iter().any(|q| q2.contains(q)) {
                    continue;
                }
                for rho in &product {
                    let joint = ctx.window(c, &[p1, p2], x, y, rho)?;
                    let split = ctx.window(c, &[p2], x, y, &ctx.window(c, &[p1], x, y, rho)?)?;
                    out.record(joint.max_abs_diff(&split), EQ_TOL, || {
                        format!(
                            "window [{x}, {y}] of {} and {} in {} does not factor",
                            sys.process(p1).name(),
                            sys.process(p2).name(),
                            c.display(sys)
                        )
                    });
                }
            }
        }
    }

    for pi in 0..n {
        let p = sys.process(pi);
        let induced = c.induced(sys, pi);
        let chain = chain_nodes(sys, c, pi);
        // Actions alone in their own interval act exactly as their operation.
        for &node in &chain {
            let a = p.action(node);
            let t = a.interval();
            if !sys.is_local_ref(crate::model::ActionRef { process: pi, node }) {
                continue;
            }
            let alone = induced
                .iter()
                .all(|&m| m == node || !p.action(m).interval().intersects(t));
            if !alone || branches_before(sys, c, t.lo()) {
                continue;
            }
            let local = a.register().to_vec();
            let rest: Vec<QubitId> = sys.qubits().iter().filter(|q| !local.contains(q)).cloned().collect();
            let env = if rest.is_empty() { None } else { Some(DensityOperator::basis(rest, 0)?) };
            for sigma in spanning_states(&local) {
                let full = match &env {
                    Some(e) => sigma.tensor(e)?,
                    None => sigma,
                }
                .reordered(sys.qubits())?;
                let got = ctx.window(c, &[pi], t.lo(), t.hi(), &full)?;
                let want = apply(a.operation(), &full)?;
                out.record(got.max_abs_diff(&want), EQ_TOL, || {
                    format!("window over {} in {} is not its operation", a.id(), c.display(sys))
                });
            }
        }
        // Windows that meet no action of the process are the identity.
        for w in ctx.points.windows(2) {
            let x = &w[0] + &ctx.eps;
            let y = &w[1] - &ctx.eps;
            if x > y || branches_before(sys, c, &x) {
                continue;
            }
            let empty = induced.iter().all(|&m| {
                let i = p.action(m).interval();
                !(i.lo() <= &y && &x <= i.hi())
            });
            if !empty {
                continue;
            }
            for rho in &ctx.states {
                let got = ctx.window(c, &[pi], &x, &y, rho)?;
                out.record(got.max_abs_diff(rho), EQ_TOL, || {
                    format!("empty window [{x}, {y}] of {} is not the identity", p.name())
                });
            }
        }
    }
    Ok(())
}

fn check_trace(ctx: &Ctx, c: &PartialSystem, out: &mut AxiomCheck) -> Result<(), DynamicsError> {
    let sys = ctx.sys;
    for rho in &ctx.states {
        let traces: Vec<f64> = ctx
            .grid
            .iter()
            .map(|t| ctx.evolve(c, t, rho).map(|s| trace(&s)))
            .collect::<Result<_, _>>()?;
        for (i, w) in traces.windows(2).enumerate() {
            out.record((w[1] - w[0]).max(0.0), VALIDITY_TOL, || {
                format!(
                    "trace of ⟦{}⟧ rises from {} to {}",
                    c.display(sys),
                    ctx.grid[i],
                    ctx.grid[i + 1]
                )
            });
        }
        if let Some(i0) = ctx.grid.iter().position(|t| is_trace_preserving_after(sys, c, t)) {
            for (i, tr) in traces.iter().enumerate().skip(i0 + 1) {
                out.record((tr - traces[i0]).abs(), VALIDITY_TOL, || {
                    format!(
                        "trace of ⟦{}⟧ changes after {} (at {})",
                        c.display(sys),
                        ctx.grid[i0],
                        ctx.grid[i]
                    )
                });
            }
        }
    }
    Ok(())
}
