use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DynamicsError;
use crate::model::{ActionId, ActionRef, System, Time};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Completion,
    Start,
    Midpoint,
    Explicit,
}

impl Policy {
    /// The policies that need no user input.
    pub const AUTOMATIC: [Policy; 3] = [Policy::Completion, Policy::Start, Policy::Midpoint];
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Completion => "completion",
            Self::Start => "start",
            Self::Midpoint => "midpoint",
            Self::Explicit => "explicit",
        })
    }
}

impl FromStr for Policy {
    type Err = DynamicsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "completion" => Ok(Self::Completion),
            "start" => Ok(Self::Start),
            "midpoint" => Ok(Self::Midpoint),
            "explicit" => Ok(Self::Explicit),
            _ => Err(DynamicsError::Schedule(format!("unknown policy {s:?}"))),
        }
    }
}

/// Application instant τ(a) ∈ T[a] for every action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    tau: HashMap<ActionId, Time>,
    policy: Policy,
}

impl Schedule {
    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn tau(&self, id: &ActionId) -> Option<&Time> {
        self.tau.get(id)
    }

    pub fn tau_of(&self, sys: &System, r: ActionRef) -> Result<&Time, DynamicsError> {
        let id = sys.action(r).id();
        self.tau
            .get(id)
            .ok_or_else(|| DynamicsError::MissingInstant(id.clone()))
    }

    /// τ values sorted by action id.
    pub fn entries(&self) -> BTreeMap<&ActionId, &Time> {
        self.tau.iter().collect()
    }

    /// Sorted distinct instants.
    pub fn instants(&self) -> Vec<Time> {
        let mut v: Vec<Time> = self.tau.values().cloned().collect();
        v.sort();
        v.dedup();
        v
    }

    /// User-supplied instants, checked against the intervals and sibling consistency.
    pub fn explicit(sys: &System, tau: HashMap<ActionId, Time>) -> Result<Self, DynamicsError> {
        let s = Self {
            tau,
            policy: Policy::Explicit,
        };
        s.check(sys)?;
        Ok(s)
    }

    /// A policy schedule with some instants replaced.
    pub fn with_overrides(
        sys: &System,
        base: Policy,
        overrides: &HashMap<ActionId, Time>,
    ) -> Result<Self, DynamicsError> {
        let mut s = make_schedule(sys, base)?;
        if overrides.is_empty() {
            return Ok(s);
        }
        for (id, t) in overrides {
            sys.locate(id)?;
            s.tau.insert(id.clone(), t.clone());
        }
        s.policy = Policy::Explicit;
        s.check(sys)?;
        Ok(s)
    }

    fn check(&self, sys: &System) -> Result<(), DynamicsError> {
        for (r, a) in sys.actions() {
            let t = self.tau_of(sys, r)?;
            if !a.interval().contains(t) {
                return Err(DynamicsError::Schedule(format!(
                    "τ({}) = {t} lies outside {}",
                    a.id(),
                    a.interval()
                )));
            }
        }
        for (pi, p) in sys.processes().iter().enumerate() {
            if !sys.report().processes[pi].aligned {
                continue;
            }
            for n in 0..p.len() {
                let kids = p.children(n);
                if kids.len() < 2 {
                    continue;
                }
                let first = &self.tau[p.action(kids[0]).id()];
                if let Some(&k) = kids.iter().find(|&&k| &self.tau[p.action(k).id()] != first) {
                    return Err(DynamicsError::Schedule(format!(
                        "siblings {} and {} of an aligned process need a common instant",
                        p.action(kids[0]).id(),
                        p.action(k).id()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Schedule from a policy. In aligned processes sibling groups get a common
/// instant: their shared start under `start` and `midpoint`, and the earliest
/// sibling completion under `completion`.
pub fn make_schedule(s: &System, policy: Policy) -> Result<Schedule, DynamicsError> {
    let pick = |lo: &Time, hi: &Time| -> Time {
        match policy {
            Policy::Completion => hi.clone(),
            Policy::Start => lo.clone(),
            Policy::Midpoint => Time::midpoint(lo, hi),
            Policy::Explicit => unreachable!(),
        }
    };
    if policy == Policy::Explicit {
        return Err(DynamicsError::Schedule(
            "explicit policy needs a full map of instants".into(),
        ));
    }
    let mut tau = HashMap::new();
    for (pi, p) in s.processes().iter().enumerate() {
        let aligned = s.report().processes[pi].aligned;
        for n in p.bfs() {
            let a = p.action(n);
            let siblings = p.parent(n).map(|q| p.children(q)).unwrap_or(&[]);
            let t = if aligned && siblings.len() > 1 {
                let ivs: Vec<_> = siblings.iter().map(|&k| p.action(k).interval()).collect();
                let lo = ivs[0].lo();
                match policy {
                    Policy::Completion => {
                        let t = ivs.iter().map(|i| i.hi()).min().expect("siblings").clone();
                        if ivs.iter().all(|i| i.contains(&t)) {
                            t
                        } else {
                            lo.clone()
                        }
                    }
                    _ => lo.clone(),
                }
            } else {
                pick(a.interval().lo(), a.interval().hi())
            };
            tau.insert(a.id().clone(), t);
        }
    }
    Ok(Schedule { tau, policy })
}
