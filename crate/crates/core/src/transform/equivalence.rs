use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{check_isomorphism, Isomorphism, TransformError};
use crate::dynamics::{make_schedule, Policy};
use crate::linalg::random::random_pure_state;
use crate::linalg::DensityOperator;
use crate::measure::mu;
use crate::model::{all_partials, System};

#[derive(Clone, Debug)]
pub struct EquivConfig {
    /// Largest ℓ of the partial systems compared; `None` means all of them.
    pub depth: Option<usize>,
    /// Random pure states in addition to the computational basis.
    pub states: usize,
    pub tol: f64,
    pub policies: Vec<Policy>,
    pub seed: u64,
}

impl Default for EquivConfig {
    fn default() -> Self {
        Self {
            depth: None,
            states: 4,
            tol: 1e-9,
            policies: Policy::AUTOMATIC.to_vec(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivFailure {
    pub policy: Policy,
    pub state: usize,
    pub partial: String,
    pub mu1: f64,
    pub mu2: f64,
}

#[derive(Clone, Debug, Default)]
pub struct EquivReport {
    pub checked: usize,
    pub max_deviation: f64,
    pub failures: Vec<EquivFailure>,
}

impl EquivReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for EquivReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} comparisons={} max_deviation={:.3e}",
            if self.passed() { "EQUIVALENT" } else { "NOT EQUIVALENT" },
            self.checked,
            self.max_deviation
        )?;
        for x in &self.failures {
            writeln!(
                f,
                "  {} state#{} ω({}): {:.12} vs {:.12}",
                x.policy, x.state, x.partial, x.mu1, x.mu2
            )?;
        }
        Ok(())
    }
}

/// Test states: every computational basis state, then seeded random pure states.
pub fn test_states(s: &System, random: usize, seed: u64) -> Result<Vec<DensityOperator>, TransformError> {
    let reg = s.qubits().to_vec();
    let mut out = (0..1usize << reg.len())
        .map(|i| DensityOperator::basis(reg.clone(), i))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.extend((0..random).map(|_| random_pure_state(reg.clone(), &mut rng)));
    Ok(out)
}

/// Compares μ_{ρ→s1}(ω(C)) with μ_{ρ→s2}(ω(γ(C))) over test states, partial
/// systems up to the configured depth and each schedule policy.
pub fn equivalence_check(
    s1: &System,
    s2: &System,
    m: &Isomorphism,
    cfg: &EquivConfig,
) -> Result<EquivReport, TransformError> {
    let iso = check_isomorphism(s1, s2, m)?;
    if !iso.ok() {
        return Err(TransformError::Isomorphism(iso.violations));
    }
    s1.require_trace_preserving()?;
    s2.require_trace_preserving()?;
    let states = test_states(s1, cfg.states, cfg.seed)?;
    let states2 = states
        .iter()
        .map(|r| r.reordered(s2.qubits()))
        .collect::<Result<Vec<_>, _>>()?;
    let partials = all_partials(s1, cfg.depth);
    let images = partials
        .iter()
        .map(|c| m.map_partial(s1, s2, c))
        .collect::<Result<Vec<_>, _>>()?;

    let mut report = EquivReport::default();
    for &policy in &cfg.policies {
        let sched1 = make_schedule(s1, policy)?;
        let sched2 = make_schedule(s2, policy)?;
        let jobs: Vec<(usize, usize)> = (0..states.len())
            .flat_map(|i| (0..partials.len()).map(move |j| (i, j)))
            .collect();
        let results = jobs
            .par_iter()
            .map(|&(i, j)| -> Result<(usize, usize, f64, f64), TransformError> {
                let a = mu(s1, &partials[j], &sched1, &states[i])?;
                let b = mu(s2, &images[j], &sched2, &states2[i])?;
                Ok((i, j, a, b))
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (i, j, a, b) in results {
            let dev = (a - b).abs();
            report.checked += 1;
            report.max_deviation = report.max_deviation.max(dev);
            if !(dev <= cfg.tol) {
                report.failures.push(EquivFailure {
                    policy,
                    state: i,
                    partial: partials[j].display(s1).to_string(),
                    mu1: a,
                    mu2: b,
                });
            }
        }
    }
    Ok(report)
}
