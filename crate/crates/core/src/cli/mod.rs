//! The `qatom` command line: scenario files in, reports out.
//!
//! Exit codes: 0 success, 1 a check failed or evaluation errored, 2 bad usage or unreadable input.

pub mod bundled;
pub mod diagram;
pub mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::dynamics::{
    check_dynamics_axioms, enumerate_tie_orders, AtomicDynamics, AxiomConfig, Dynamics, Policy,
};
use crate::linalg::DensityOperator;
use crate::measure::mu;
use crate::model::{partial, Anchor, PartialSystem, System, Time};
use crate::transform::{atomize, equivalence_check, EquivConfig, Isomorphism};
pub use scenario::{load, Scenario, ScenarioError, ScenarioFile};

#[derive(Parser, Debug)]
#[command(name = "qatom", version, about = "Simulate and verify non-atomic distributed quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check well-formedness, trace preservation and alignment.
    Validate { scenario: String },
    /// Evolve the initial state and print the result.
    Simulate {
        scenario: String,
        /// Evaluation time; defaults to the end of the last action.
        #[arg(long)]
        time: Option<Time>,
        #[arg(long)]
        schedule: Option<Policy>,
        /// Comma-separated action ids anchoring a partial system.
        #[arg(long)]
        anchors: Option<String>,
        /// Initial basis state as a bitstring over the scenario's qubits; defaults to the file's state.
        #[arg(long)]
        state: Option<String>,
        /// Evolve under every tie-break order of the processes and report the spread.
        #[arg(long)]
        ties: bool,
        #[arg(long)]
        json: bool,
    },
    /// Probability of the outcome sets given by partial systems.
    Measure {
        scenario: String,
        /// Comma-separated action ids; repeat for several outcome sets.
        #[arg(long, required = true)]
        anchors: Vec<String>,
        #[arg(long, value_enum, default_value_t = StateChoice::Initial)]
        states: StateChoice,
        #[arg(long)]
        schedule: Option<Policy>,
        #[arg(long)]
        json: bool,
    },
    /// Rewrite every action as instantaneous at a distinct instant.
    Atomize {
        scenario: String,
        #[arg(short, long)]
        output: PathBuf,
        /// Write the action correspondence here.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Compare two isomorphic systems on every outcome set.
    Equiv {
        first: String,
        second: String,
        /// Correspondence file; defaults to matching process names and action ids.
        #[arg(long)]
        map: Option<PathBuf>,
        /// Largest refinement depth compared.
        #[arg(long)]
        depth: Option<usize>,
        /// Random pure test states besides the basis.
        #[arg(long, default_value_t = 4)]
        states: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Draw the system on a time axis.
    Diagram {
        scenario: String,
        #[arg(long, value_enum, default_value_t = DiagramFormat::Ascii)]
        format: DiagramFormat,
        #[arg(long, default_value_t = 72)]
        width: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check the dynamics axioms on a scenario.
    Axioms {
        scenario: String,
        #[arg(long)]
        schedule: Option<Policy>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 24)]
        max_partials: usize,
    },
    /// Write the bundled example scenarios.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = bundled::DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StateChoice {
    Initial,
    /// Every computational basis state.
    Basis,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DiagramFormat {
    Ascii,
    Svg,
}

enum Failure {
    Usage(String),
    Failed(String),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::Usage(e.to_string())
    }
}

macro_rules! failed_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Failed(e.to_string())
            }
        }
    )*};
}
failed_from!(
    crate::dynamics::DynamicsError,
    crate::measure::MeasureError,
    crate::transform::TransformError,
    crate::model::ModelError,
    crate::linalg::LinalgError
);

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

/// `@name` is a bundled scenario, anything else a path.
pub fn resolve(arg: &str) -> Result<Scenario, ScenarioError> {
    match arg.strip_prefix('@') {
        Some(name) => {
            let text = bundled::bundled(name).ok_or_else(|| ScenarioError::Io {
                path: arg.to_owned(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such bundled scenario"),
            })?;
            ScenarioFile::parse(text)?.build()
        }
        None => load(Path::new(arg)),
    }
}

/// Partial system anchored at comma-separated action ids, at most one per process.
pub fn parse_anchors(s: &System, spec: &str) -> Result<PartialSystem, String> {
    let mut anchors = vec![Anchor::Whole; s.processes().len()];
    for id in spec.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let r = s.locate(&id.into()).map_err(|e| e.to_string())?;
        if anchors[r.process] != Anchor::Whole {
            return Err(format!("two anchors given for process {}", s.process(r.process).name()));
        }
        anchors[r.process] = Anchor::At(id.into());
    }
    partial(s, &anchors).map_err(|e| e.to_string())
}

fn anchors_of(s: &System, spec: &str) -> Result<PartialSystem, Failure> {
    parse_anchors(s, spec).map_err(Failure::Usage)
}

fn basis_label(i: usize, n: usize) -> String {
    format!("|{i:0n$b}⟩")
}

fn probabilities(rho: &DensityOperator) -> Vec<(String, f64)> {
    let n = rho.register().len();
    (0..rho.dim())
        .map(|i| (basis_label(i, n), rho.matrix().get(i, i).re))
        .filter(|(_, p)| p.abs() > 1e-12)
        .collect()
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
        Err(Failure::Failed(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
    }
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let w = |e: std::io::Error| Failure::Failed(e.to_string());
    match cmd {
        Command::Validate { scenario } => {
            let sc = resolve(&scenario)?;
            let s = &sc.system;
            let r = s.report();
            let local = s.local_actions().len();
            let total = s.actions().count();
            writeln!(out, "processes: {}  qubits: {}  actions: {total} ({local} local)", s.processes().len(), s.qubits().len()).map_err(w)?;
            writeln!(out, "well-formed: {}", r.ok()).map_err(w)?;
            writeln!(out, "trace-preserving: {}", r.trace_preserving()).map_err(w)?;
            writeln!(out, "aligned: {}", r.aligned()).map_err(w)?;
            for v in r.all_violations() {
                writeln!(out, "  {v}").map_err(w)?;
            }
            Ok(if r.ok() { 0 } else { 1 })
        }
        Command::Simulate { scenario, time, schedule, anchors, state, ties, json } => {
            let sc = resolve(&scenario)?;
            let s = &sc.system;
            let sched = sc.schedule(schedule)?;
            let c = match anchors {
                Some(a) => anchors_of(s, &a)?,
                None => PartialSystem::whole(s),
            };
            let t = time.unwrap_or_else(|| s.max_time());
            let rho = match state {
                Some(bits) => {
                    let n = s.qubits().len();
                    let i = usize::from_str_radix(&bits, 2)
                        .ok()
                        .filter(|_| bits.len() == n)
                        .ok_or_else(|| Failure::Usage(format!("--state wants {n} bits, got {bits:?}")))?;
                    DensityOperator::basis(s.qubits().to_vec(), i)?
                }
                None => sc.initial_state.clone(),
            };
            let r = AtomicDynamics::new().evolve(s, &c, &sched, &t, &rho)?;
            for m in &r.warnings {
                writeln!(err, "warning: {m}").map_err(w)?;
            }
            let spread = if ties {
                Some(enumerate_tie_orders(s, &c, &sched, &t, &rho)?.divergence)
            } else {
                None
            };
            let probs = probabilities(&r.state);
            if json {
                let v = json!({
                    "time": t.to_string(),
                    "policy": sched.policy().to_string(),
                    "trace": r.state.trace(),
                    "density": r.state.matrix().chop(1e-12).to_rows().iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect::<Vec<_>>(),
                    "probabilities": probs.iter().map(|(k, p)| json!({"state": k, "p": p})).collect::<Vec<_>>(),
                    "applied": r.applied.iter().map(|e| json!({"branch": e.branch, "action": e.action.to_string(), "tau": e.tau.to_string()})).collect::<Vec<_>>(),
                    "warnings": r.warnings,
                    "tie_divergence": spread,
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json")).map_err(w)?;
                return Ok(0);
            }
            writeln!(out, "t = {t}  policy = {}  branches = {}", sched.policy(), r.branches).map_err(w)?;
            writeln!(out, "trace = {:.12}", r.state.trace()).map_err(w)?;
            for (k, p) in &probs {
                writeln!(out, "  {k}  {p:.12}").map_err(w)?;
            }
            writeln!(out, "density matrix:").map_err(w)?;
            for row in r.state.matrix().chop(1e-12).to_rows() {
                let cells: Vec<String> = row.iter().map(|z| format!("{:+.6}{:+.6}i", z.re, z.im)).collect();
                writeln!(out, "  {}", cells.join(" ")).map_err(w)?;
            }
            writeln!(out, "applied:").map_err(w)?;
            for e in &r.applied {
                writeln!(out, "  [{}] {} at {}", e.branch, e.action, e.tau).map_err(w)?;
            }
            if let Some(d) = spread {
                writeln!(out, "tie-order divergence = {d:.3e}").map_err(w)?;
            }
            Ok(0)
        }
        Command::Measure { scenario, anchors, states, schedule, json } => {
            let sc = resolve(&scenario)?;
            let s = &sc.system;
            let sched = sc.schedule(schedule)?;
            let sets = anchors.iter().map(|a| anchors_of(s, a)).collect::<Result<Vec<_>, _>>()?;
            let rhos: Vec<(String, DensityOperator)> = match states {
                StateChoice::Initial => vec![("initial".to_owned(), sc.initial_state.clone())],
                StateChoice::Basis => (0..1usize << s.qubits().len())
                    .map(|i| Ok((basis_label(i, s.qubits().len()), DensityOperator::basis(s.qubits().to_vec(), i)?)))
                    .collect::<Result<_, crate::linalg::LinalgError>>()?,
            };
            let mut rows = Vec::new();
            for (label, rho) in &rhos {
                for (spec, c) in anchors.iter().zip(&sets) {
                    rows.push((label.clone(), spec.clone(), c.display(s).to_string(), mu(s, c, &sched, rho)?));
                }
            }
            if json {
                let v: Vec<_> = rows
                    .iter()
                    .map(|(st, a, c, p)| json!({"state": st, "anchors": a, "partial": c, "mu": p}))
                    .collect();
                writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json")).map_err(w)?;
            } else {
                for (st, _, c, p) in rows {
                    writeln!(out, "{st}  μ(ω({c})) = {p:.12}").map_err(w)?;
                }
            }
            Ok(0)
        }
        Command::Atomize { scenario, output, map } => {
            let sc = resolve(&scenario)?;
            let t = atomize(&sc.system)?;
            let mut f = ScenarioFile::from_system(&t.system, None);
            f.description = Some(format!("atomized from {scenario}"));
            f.initial_state = Some(scenario::StateSpec::Density(scenario::matrix_to_spec(sc.initial_state.matrix())));
            std::fs::write(&output, f.to_json()).map_err(|e| io_err(&output, e))?;
            if let Some(m) = map {
                std::fs::write(&m, serde_json::to_string_pretty(&t.gamma).expect("json")).map_err(|e| io_err(&m, e))?;
            }
            writeln!(out, "wrote {} ({} actions)", output.display(), t.system.actions().count()).map_err(w)?;
            Ok(0)
        }
        Command::Equiv { first, second, map, depth, states, tol, seed, json } => {
            let a = resolve(&first)?;
            let b = resolve(&second)?;
            let gamma = match map {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| io_err(&p, e))?;
                    serde_json::from_str::<Isomorphism>(&text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
                }
                None => Isomorphism::by_ids(&a.system),
            };
            let cfg = EquivConfig { depth, states, tol, seed, ..EquivConfig::default() };
            let r = equivalence_check(&a.system, &b.system, &gamma, &cfg)?;
            if json {
                let v = json!({
                    "equivalent": r.passed(),
                    "checked": r.checked,
                    "max_deviation": r.max_deviation,
                    "failures": r.failures.iter().map(|f| json!({
                        "policy": f.policy.to_string(), "state": f.state, "partial": f.partial, "mu1": f.mu1, "mu2": f.mu2
                    })).collect::<Vec<_>>(),
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json")).map_err(w)?;
            } else {
                write!(out, "{r}").map_err(w)?;
            }
            Ok(if r.passed() { 0 } else { 1 })
        }
        Command::Diagram { scenario, format, width, output } => {
            let sc = resolve(&scenario)?;
            let text = match format {
                DiagramFormat::Ascii => diagram::ascii(&sc.system, width),
                DiagramFormat::Svg => diagram::svg(&sc.system),
            };
            match output {
                Some(p) => std::fs::write(&p, text).map_err(|e| io_err(&p, e))?,
                None => write!(out, "{text}").map_err(w)?,
            }
            Ok(0)
        }
        Command::Axioms { scenario, schedule, seed, max_partials } => {
            let sc = resolve(&scenario)?;
            let sched = sc.schedule(schedule)?;
            let cfg = AxiomConfig { seed, max_partials, ..AxiomConfig::default() };
            let r = check_dynamics_axioms(&AtomicDynamics::new(), &sc.system, &sched, &cfg)?;
            write!(out, "{r}").map_err(w)?;
            Ok(if r.passed() { 0 } else { 1 })
        }
        Command::Generate { out: dir, seed } => {
            std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
            for (name, f) in bundled::generate(seed) {
                let p = dir.join(format!("{name}.json"));
                std::fs::write(&p, f.to_json() + "\n").map_err(|e| io_err(&p, e))?;
                writeln!(out, "wrote {}", p.display()).map_err(w)?;
            }
            Ok(0)
        }
    }
}
