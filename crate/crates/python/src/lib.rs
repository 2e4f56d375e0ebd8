//! Python bindings: load scenarios, evolve, measure, atomize and compare.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qatom::cli::{self, bundled, Scenario as CoreScenario, ScenarioFile};
use qatom::dynamics::{check_dynamics_axioms, evolve, AxiomConfig, Policy};
use qatom::measure::mu;
use qatom::model::{PartialSystem, Time};
use qatom::transform::{self, EquivConfig, Isomorphism};

fn err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn policy(name: Option<&str>) -> PyResult<Option<Policy>> {
    name.map(|p| p.parse::<Policy>().map_err(err)).transpose()
}

/// A loaded scenario: system, initial state and schedule settings.
#[pyclass(frozen, module = "qatom_py")]
struct Scenario {
    inner: CoreScenario,
}

impl Scenario {
    fn partial(&self, anchors: Option<&str>) -> PyResult<PartialSystem> {
        match anchors {
            Some(a) => cli::parse_anchors(&self.inner.system, a).map_err(err),
            None => Ok(PartialSystem::whole(&self.inner.system)),
        }
    }
}

#[pymethods]
impl Scenario {
    /// Reads a scenario file, or a bundled scenario when `source` starts with `@`.
    #[staticmethod]
    fn load(source: &str) -> PyResult<Self> {
        Ok(Self { inner: cli::resolve(source).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = ScenarioFile::parse(text).and_then(|f| f.build()).map_err(err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        ScenarioFile::from_system(&self.inner.system, None).to_json()
    }

    #[getter]
    fn qubits(&self) -> Vec<String> {
        self.inner.system.qubits().iter().map(|q| q.as_str().to_owned()).collect()
    }

    #[getter]
    fn actions(&self) -> Vec<String> {
        self.inner.system.actions().map(|(_, a)| a.id().to_string()).collect()
    }

    #[getter]
    fn max_time(&self) -> String {
        self.inner.system.max_time().to_string()
    }

    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = &self.inner.system;
        let r = s.report();
        let d = PyDict::new(py);
        d.set_item("ok", r.ok())?;
        d.set_item("trace_preserving", r.trace_preserving())?;
        d.set_item("aligned", r.aligned())?;
        d.set_item("local_actions", s.local_actions().len())?;
        d.set_item("violations", r.all_violations())?;
        Ok(d)
    }

    /// Density matrix at `time` (default: end of the last action) as nested lists of complex numbers.
    #[pyo3(signature = (time=None, schedule=None, anchors=None))]
    fn simulate(&self, time: Option<&str>, schedule: Option<&str>, anchors: Option<&str>) -> PyResult<Vec<Vec<Complex64>>> {
        let s = &self.inner.system;
        let sched = self.inner.schedule(policy(schedule)?).map_err(err)?;
        let t = match time {
            Some(t) => t.parse::<Time>().map_err(err)?,
            None => s.max_time(),
        };
        let c = self.partial(anchors)?;
        let r = evolve(s, &c, &sched, &t, &self.inner.initial_state).map_err(err)?;
        Ok(r.state.matrix().to_rows())
    }

    /// Probability of the outcomes consistent with the anchored partial system.
    #[pyo3(signature = (anchors=None, schedule=None))]
    fn measure(&self, anchors: Option<&str>, schedule: Option<&str>) -> PyResult<f64> {
        let sched = self.inner.schedule(policy(schedule)?).map_err(err)?;
        let c = self.partial(anchors)?;
        mu(&self.inner.system, &c, &sched, &self.inner.initial_state).map_err(err)
    }

    /// The atomized system and its action correspondence as (original, image) pairs.
    fn atomize(&self) -> PyResult<(Scenario, Vec<(String, String)>)> {
        let t = transform::atomize(&self.inner.system).map_err(err)?;
        let pairs = t.gamma.actions.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        let inner = CoreScenario {
            system: t.system,
            overrides: Default::default(),
            ..self.inner.clone()
        };
        Ok((Scenario { inner }, pairs))
    }

    #[pyo3(signature = (format="ascii", width=72))]
    fn diagram(&self, format: &str, width: usize) -> PyResult<String> {
        match format {
            "ascii" => Ok(cli::diagram::ascii(&self.inner.system, width)),
            "svg" => Ok(cli::diagram::svg(&self.inner.system)),
            other => Err(err(format!("unknown format {other:?}"))),
        }
    }

    /// Runs the dynamics axiom checker; returns {check name: passed}.
    #[pyo3(signature = (schedule=None, seed=0))]
    fn check_axioms(&self, schedule: Option<&str>, seed: u64) -> PyResult<Vec<(String, bool)>> {
        let sched = self.inner.schedule(policy(schedule)?).map_err(err)?;
        let cfg = AxiomConfig { seed, ..AxiomConfig::default() };
        let r = check_dynamics_axioms(&qatom::dynamics::AtomicDynamics::new(), &self.inner.system, &sched, &cfg)
            .map_err(err)?;
        Ok(r.checks().iter().map(|c| (c.name.to_string(), c.passed)).collect())
    }
}

/// Compares two scenarios outcome by outcome. Without `mapping`, actions are matched by id.
#[pyfunction]
#[pyo3(signature = (first, second, mapping=None, depth=None, states=4, tol=1e-9, seed=0))]
fn equivalence<'py>(
    py: Python<'py>,
    first: &Scenario,
    second: &Scenario,
    mapping: Option<Vec<(String, String)>>,
    depth: Option<usize>,
    states: usize,
    tol: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let (a, b) = (&first.inner.system, &second.inner.system);
    let mut gamma = Isomorphism::by_ids(a);
    if let Some(m) = mapping {
        gamma.actions = m.into_iter().map(|(x, y)| (x.into(), y.into())).collect();
    }
    let cfg = EquivConfig { depth, states, tol, seed, ..EquivConfig::default() };
    let r = transform::equivalence_check(a, b, &gamma, &cfg).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("equivalent", r.passed())?;
    d.set_item("checked", r.checked)?;
    d.set_item("max_deviation", r.max_deviation)?;
    d.set_item("failures", r.failures.len())?;
    Ok(d)
}

#[pyfunction]
fn bundled_scenarios() -> Vec<&'static str> {
    bundled::BUNDLED.iter().map(|(n, _)| *n).collect()
}

/// Runs the command line with `args` (without the program name); returns (exit code, stdout, stderr).
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut errs = Vec::new();
    let code = cli::run(std::iter::once("qatom".to_owned()).chain(args), &mut out, &mut errs);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&errs).into_owned())
}

#[pymodule]
fn qatom_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_function(wrap_pyfunction!(equivalence, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
