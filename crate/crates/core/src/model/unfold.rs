use std::collections::BTreeSet;

use super::{Action, ActionTree, ModelError, Process, Time, TimeInterval};
use crate::linalg::{OpKind, QuantumOperation};

/// Deepest truncation `unfold` will build.
pub const MAX_UNFOLD_DEPTH: usize = 64;

/// Finite description of a repeating process: a setup action, then a
/// branching every `period` whose `recurse_on` arm repeats the branching.
#[derive(Clone, Debug)]
pub struct ProcessTemplate {
    pub name: String,
    pub setup: QuantumOperation,
    pub branches: Vec<QuantumOperation>,
    pub recurse_on: usize,
    pub period: Time,
    pub duration: Time,
    pub environment: BTreeSet<String>,
}

impl ProcessTemplate {
    /// Measure in Z, and on outcome 1 apply `setup` again and measure again.
    pub fn repeat_until_zero(name: &str, setup: QuantumOperation, period: Time, duration: Time) -> Result<Self, ModelError> {
        let reg = setup.register().to_vec();
        Ok(Self {
            name: name.to_owned(),
            branches: vec![
                QuantumOperation::named("MEASURE_Z(0)", reg.clone())?,
                after_projector(&setup, 1)?,
            ],
            setup,
            recurse_on: 1,
            period,
            duration,
            environment: BTreeSet::from([format!("{name}_meter")]),
        })
    }
}

/// `op` applied after projecting onto Z outcome `m`.
fn after_projector(op: &QuantumOperation, m: u8) -> Result<QuantumOperation, ModelError> {
    let p = QuantumOperation::named(&format!("MEASURE_Z({m})"), op.register().to_vec())?;
    let c = crate::linalg::compose(op, &p)?;
    Ok(QuantumOperation::from_kraus(
        c.register().to_vec(),
        c.kraus().to_vec(),
        OpKind::PartialMeasurement,
    )?)
}

/// Truncates a template to a finite tree with `depth` levels of branching.
pub fn unfold(t: &ProcessTemplate, depth: usize) -> Result<Process, ModelError> {
    if t.period.is_zero() {
        return Err(ModelError::Template("period must be positive".into()));
    }
    if t.duration >= t.period {
        return Err(ModelError::Template("duration must be shorter than the period".into()));
    }
    if depth > MAX_UNFOLD_DEPTH {
        return Err(ModelError::Template(format!("depth {depth} exceeds {MAX_UNFOLD_DEPTH}")));
    }
    if t.recurse_on >= t.branches.len() {
        return Err(ModelError::Template("recursive arm out of range".into()));
    }
    let interval = |level: usize| {
        let lo = t.period.mul_int(level as i64);
        let hi = &lo + &t.duration;
        TimeInterval::new(lo, hi)
    };
    let env_for = |op: &QuantumOperation| {
        if op.kind() == OpKind::Unitary {
            BTreeSet::new()
        } else {
            t.environment.clone()
        }
    };
    fn level(
        t: &ProcessTemplate,
        l: usize,
        depth: usize,
        interval: &dyn Fn(usize) -> Result<TimeInterval, ModelError>,
        env_for: &dyn Fn(&QuantumOperation) -> BTreeSet<String>,
    ) -> Result<Vec<ActionTree>, ModelError> {
        if l > depth {
            return Ok(Vec::new());
        }
        t.branches
            .iter()
            .enumerate()
            .map(|(i, op)| {
                let a = Action::new(format!("{}{}_{}", t.name, l, i), interval(l)?, op.clone(), env_for(op))?;
                let children = if i == t.recurse_on {
                    level(t, l + 1, depth, interval, env_for)?
                } else {
                    Vec::new()
                };
                Ok(ActionTree::node(a, children))
            })
            .collect()
    }
    let root = Action::new(format!("{}0", t.name), interval(0)?, t.setup.clone(), env_for(&t.setup))?;
    let children = level(t, 1, depth, &interval, &env_for)?;
    Process::from_tree(t.name.clone(), ActionTree::node(root, children))
}
