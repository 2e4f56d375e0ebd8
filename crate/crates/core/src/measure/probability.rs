use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EventSet, MeasureError};
use crate::dynamics::{AtomicDynamics, Dynamics, Schedule};
use crate::linalg::{trace, DensityOperator, VALIDITY_TOL};
use crate::model::{all_partials, children_expansion, PartialSystem, System};

/// μ_{ρ→S}(ω(C)): the trace of ⟦C⟧ once every action of the system has completed.
pub fn mu(s: &System, c: &PartialSystem, sched: &Schedule, rho: &DensityOperator) -> Result<f64, MeasureError> {
    let tr = trace(rho);
    if (tr - 1.0).abs() > VALIDITY_TOL {
        return Err(MeasureError::TraceNotOne(tr));
    }
    let r = AtomicDynamics::new().evolve(s, c, sched, &s.max_time(), rho)?;
    Ok(trace(&r.state))
}

pub fn mu_event(s: &System, e: &EventSet, sched: &Schedule, rho: &DensityOperator) -> Result<f64, MeasureError> {
    e.parts().iter().map(|c| mu(s, c, sched, rho)).sum()
}

/// Probability clamped to [0, 1] for reporting.
pub fn clamp_probability(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

#[derive(Clone, Debug, Default)]
pub struct AdditivityReport {
    pub checked: usize,
    pub max_deviation: f64,
    pub failures: Vec<String>,
}

impl AdditivityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, dev: f64, what: impl FnOnce() -> String) {
        self.checked += 1;
        self.max_deviation = self.max_deviation.max(dev);
        if !(dev <= VALIDITY_TOL) && self.failures.len() < 8 {
            self.failures.push(format!("{} (deviation {dev:.3e})", what()));
        }
    }
}

/// Samples branching partials C and checks μ(C) = Σ μ over its children, then
/// random refinement families of C and checks their total.
pub fn mu_additivity_check(
    s: &System,
    rho: &DensityOperator,
    sched: &Schedule,
    samples: usize,
    seed: u64,
) -> Result<AdditivityReport, MeasureError> {
    s.require_trace_preserving()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AdditivityReport::default();
    let whole = mu(s, &PartialSystem::whole(s), sched, rho)?;
    report.record((whole - 1.0).abs(), || format!("μ(ω(S)) = {whole}"));
    let branching: Vec<(PartialSystem, usize)> = all_partials(s, None)
        .into_iter()
        .flat_map(|c| {
            (0..s.processes().len())
                .filter(|&pi| c.branch_point(s, pi).is_some())
                .map(|pi| (c.clone(), pi))
                .collect::<Vec<_>>()
        })
        .collect();
    if branching.is_empty() {
        return Ok(report);
    }
    for _ in 0..samples {
        let (c, pi) = branching.choose(&mut rng).expect("nonempty");
        let parent = mu(s, c, sched, rho)?;
        let kids = children_expansion(s, c, *pi)?;
        let sum: f64 = kids.iter().map(|k| mu(s, k, sched, rho)).sum::<Result<f64, _>>()?;
        report.record((parent - sum).abs(), || {
            format!("μ(ω({})) = {parent} but its children sum to {sum}", c.display(s))
        });

        let family = random_refinement(s, c, &mut rng)?;
        let total: f64 = family.iter().map(|k| mu(s, k, sched, rho)).sum::<Result<f64, _>>()?;
        report.record((parent - total).abs(), || {
            format!("refinement of {} into {} parts sums to {total}, not {parent}", c.display(s), family.len())
        });
    }
    Ok(report)
}

/// Applies a random number of random child expansions to {c}.
fn random_refinement<R: Rng>(s: &System, c: &PartialSystem, rng: &mut R) -> Result<Vec<PartialSystem>, MeasureError> {
    let mut family = vec![c.clone()];
    for _ in 0..rng.random_range(1..=4) {
        let options: Vec<(usize, usize)> = family
            .iter()
            .enumerate()
            .flat_map(|(i, d)| {
                (0..s.processes().len())
                    .filter(|&pi| d.branch_point(s, pi).is_some())
                    .map(move |pi| (i, pi))
                    .collect::<Vec<_>>()
            })
            .collect();
        let Some(&(i, pi)) = options.choose(rng) else { break };
        let d = family.remove(i);
        family.extend(children_expansion(s, &d, pi)?);
    }
    Ok(family)
}
