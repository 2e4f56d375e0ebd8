//! Seeded random systems for property tests and the acceptance suite.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::random::{haar_unitary, random_channel};
use crate::linalg::{ComplexMatrix, OpKind, QuantumOperation, QubitId};
use crate::model::{Action, ActionTree, Process, System, Time, TimeInterval};

#[derive(Clone, Debug)]
pub struct RandomSystemConfig {
    pub min_processes: usize,
    pub max_processes: usize,
    pub max_qubits: usize,
    /// Maximum number of edges on a root-to-leaf path.
    pub max_height: usize,
    /// Shift intervals until no action overlaps a same-qubit action of another process.
    pub local_only: bool,
    /// Cap on the number of maximal paths of the whole system.
    pub max_paths: usize,
}

impl Default for RandomSystemConfig {
    fn default() -> Self {
        Self {
            min_processes: 2,
            max_processes: 3,
            max_qubits: 3,
            max_height: 3,
            local_only: true,
            max_paths: 32,
        }
    }
}

/// Shape of one node before times are assigned.
struct Node {
    op: QuantumOperation,
    len: i64,
    gap: i64,
    children: Vec<Node>,
}

fn pick_register<R: Rng>(qubits: &[QubitId], rng: &mut R) -> Vec<QubitId> {
    let k = if qubits.len() > 1 && rng.random_bool(0.3) { 2 } else { 1 };
    let mut q = qubits.to_vec();
    q.shuffle(rng);
    q.truncate(k);
    q
}

/// Sibling operations {P_S U} for a random split of the basis into `groups` nonempty sets.
fn measurement_group<R: Rng>(reg: &[QubitId], groups: usize, rng: &mut R) -> Vec<QuantumOperation> {
    let d = 1usize << reg.len();
    let u = haar_unitary(d, rng);
    let mut idx: Vec<usize> = (0..d).collect();
    idx.shuffle(rng);
    let mut sets: Vec<Vec<usize>> = vec![Vec::new(); groups];
    for (k, i) in idx.into_iter().enumerate() {
        let g = if k < groups { k } else { rng.random_range(0..groups) };
        sets[g].push(i);
    }
    sets.into_iter()
        .map(|s| {
            let mut p = ComplexMatrix::zeros(d, d);
            for i in s {
                p.set(i, i, num_complex::Complex64::new(1.0, 0.0));
            }
            QuantumOperation::from_kraus(reg.to_vec(), vec![p.matmul(&u)], OpKind::PartialMeasurement)
                .expect("projector times unitary")
                .with_label("M")
        })
        .collect()
}

fn random_shape<R: Rng>(
    qubits: &[QubitId],
    op: QuantumOperation,
    depth_left: usize,
    budget: &mut usize,
    rng: &mut R,
) -> Node {
    let len = rng.random_range(1..=4);
    let gap = rng.random_range(1..=3);
    let mut children = Vec::new();
    if depth_left > 0 && rng.random_bool(0.75) {
        let reg = pick_register(qubits, rng);
        let max_groups = (1usize << reg.len()).min(3);
        if *budget >= 2 && rng.random_bool(0.6) {
            let groups = rng.random_range(2..=max_groups.min(*budget));
            *budget /= groups;
            for op in measurement_group(&reg, groups, rng) {
                let mut b = *budget;
                children.push(random_shape(qubits, op, depth_left - 1, &mut b, rng));
            }
        } else {
            let op = if rng.random_bool(0.8) {
                QuantumOperation::unitary(reg.clone(), haar_unitary(1 << reg.len(), rng))
                    .expect("haar")
                    .with_label("U")
            } else {
                random_channel(reg.clone(), 2, rng).with_label("N")
            };
            children.push(random_shape(qubits, op, depth_left - 1, budget, rng));
        }
    }
    Node {
        op,
        len,
        gap,
        children,
    }
}

fn leaf_count(n: &Node) -> usize {
    if n.children.is_empty() {
        1
    } else {
        n.children.iter().map(leaf_count).sum()
    }
}

/// Places `node` (and its subtree) at or after `earliest`, avoiding `occupied` when asked.
fn place(
    node: Node,
    lo_min: i64,
    name: &str,
    counter: &mut usize,
    meter: &str,
    occupied: &[(Vec<QubitId>, i64, i64)],
    placed: &mut Vec<(Vec<QubitId>, i64, i64)>,
    local_only: bool,
) -> ActionTree {
    place_group(vec![node], lo_min, name, counter, meter, occupied, placed, local_only)
        .pop()
        .expect("one node")
}

#[allow(clippy::too_many_arguments)]
fn place_group(
    group: Vec<Node>,
    lo_min: i64,
    name: &str,
    counter: &mut usize,
    meter: &str,
    occupied: &[(Vec<QubitId>, i64, i64)],
    placed: &mut Vec<(Vec<QubitId>, i64, i64)>,
    local_only: bool,
) -> Vec<ActionTree> {
    let mut lo = lo_min;
    if local_only {
        // Siblings share a start, so shift the whole group past every conflict.
        loop {
            let conflict = group.iter().find_map(|n| {
                let hi = lo + n.len;
                occupied
                    .iter()
                    .filter(|(q, a, b)| {
                        q.iter().any(|x| n.op.register().contains(x)) && *a <= hi && lo <= *b
                    })
                    .map(|(_, _, b)| *b)
                    .max()
            });
            match conflict {
                Some(b) => lo = b + 1,
                None => break,
            }
        }
    }
    group
        .into_iter()
        .map(|n| {
            let hi = lo + n.len;
            *counter += 1;
            let env: BTreeSet<String> = if n.op.kind() == OpKind::Unitary {
                BTreeSet::new()
            } else {
                BTreeSet::from([meter.to_owned()])
            };
            let action = Action::new(
                format!("{name}{counter}"),
                TimeInterval::new(Time::int(lo), Time::int(hi)).expect("lo < hi"),
                n.op,
                env,
            )
            .expect("environment only on non-unitary actions");
            placed.push((action.register().to_vec(), lo, hi));
            let children = if n.children.is_empty() {
                Vec::new()
            } else {
                let gap = n.gap;
                place_group(n.children, hi + gap, name, counter, meter, occupied, placed, local_only)
            };
            ActionTree::node(action, children)
        })
        .collect()
}

/// Random trace-preserving aligned system with positive-length intervals.
pub fn random_system(cfg: &RandomSystemConfig, seed: u64) -> System {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_qubits = rng.random_range(1..=cfg.max_qubits.max(1));
    let qubits: Vec<QubitId> = (0..n_qubits).map(|i| QubitId::new(format!("q{i}"))).collect();
    let n_proc = rng.random_range(cfg.min_processes..=cfg.max_processes.max(cfg.min_processes));
    let per_process_paths = ((cfg.max_paths as f64).powf(1.0 / n_proc as f64).floor() as usize).max(1);
    let mut occupied: Vec<(Vec<QubitId>, i64, i64)> = Vec::new();
    let mut processes = Vec::new();
    for p in 0..n_proc {
        let name = ["A", "B", "C", "D", "E"][p % 5];
        let root_reg = pick_register(&qubits, &mut rng);
        let root_op = QuantumOperation::unitary(root_reg.clone(), haar_unitary(1 << root_reg.len(), &mut rng))
            .expect("haar")
            .with_label("U");
        let shape = loop {
            let mut budget = per_process_paths;
            let s = random_shape(&qubits, root_op.clone(), cfg.max_height, &mut budget, &mut rng);
            if leaf_count(&s) <= per_process_paths {
                break s;
            }
        };
        let start = rng.random_range(0..=3);
        let mut placed = Vec::new();
        let mut counter = 0;
        let tree = place(
            shape,
            start,
            name,
            &mut counter,
            &format!("{name}_meter"),
            &occupied,
            &mut placed,
            cfg.local_only,
        );
        occupied.extend(placed);
        processes.push(Process::from_tree(name, tree).expect("generated tree"));
    }
    System::with_qubits(processes, qubits).expect("generated system")
}
