//! Example scenarios shipped with the crate, and the seeded generator that writes them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::scenario::{matrix_to_spec, ActionSpec, OpSpec, ProcessSpec, ScenarioFile, ScheduleSpec, StateSpec};
use crate::dynamics::Policy;
use crate::linalg::random::haar_unitary;
use crate::linalg::{register, OpKind, QubitId};
use crate::model::TimeInterval;

/// Seed the bundled files were generated with.
pub const DEFAULT_SEED: u64 = 7;

pub const BUNDLED: &[(&str, &str)] = &[
    ("s1", include_str!("../../scenarios/s1.json")),
    ("s1_async", include_str!("../../scenarios/s1_async.json")),
    ("s2", include_str!("../../scenarios/s2.json")),
    ("s2_async", include_str!("../../scenarios/s2_async.json")),
    ("s3", include_str!("../../scenarios/s3.json")),
    ("s3_async", include_str!("../../scenarios/s3_async.json")),
    ("s4", include_str!("../../scenarios/s4.json")),
    ("s4_async", include_str!("../../scenarios/s4_async.json")),
    ("nonlocal_overlap", include_str!("../../scenarios/nonlocal_overlap.json")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

struct Draws {
    rng: ChaCha8Rng,
}

impl Draws {
    fn unitary(&mut self, id: &str) -> OpSpec {
        OpSpec::Kraus {
            kraus: vec![matrix_to_spec(&haar_unitary(2, &mut self.rng))],
            kind: OpKind::Unitary,
            label: Some(id.to_owned()),
        }
    }
}

fn node(id: &str, lo: i64, hi: i64, qubits: &[&str], op: OpSpec) -> ActionSpec {
    ActionSpec {
        id: id.to_owned(),
        interval: TimeInterval::ints(lo, hi).expect("lo ≤ hi"),
        register: register(qubits),
        op,
        environment: Vec::new(),
        children: Vec::new(),
    }
}

fn gate(name: &str) -> OpSpec {
    OpSpec::Gate { gate: name.to_owned() }
}

/// Links `nodes` into a chain, each the only child of the previous one.
fn chain(mut nodes: Vec<ActionSpec>) -> ActionSpec {
    let mut last = nodes.pop().expect("nonempty chain");
    while let Some(mut prev) = nodes.pop() {
        prev.children = vec![last];
        last = prev;
    }
    last
}

/// Appends a Z-measurement pair as the children of the chain's last action.
fn with_measurement(mut root: ActionSpec, prefix: &str, qubit: &str, lo: i64, hi: i64, meter: &str) -> ActionSpec {
    let mut cur = &mut root;
    while !cur.children.is_empty() {
        cur = &mut cur.children[0];
    }
    cur.children = (0..2)
        .map(|o| {
            let mut m = node(&format!("{prefix}{o}"), lo, hi, &[qubit], gate(&format!("MEASURE_Z({o})")));
            m.environment = vec![meter.to_owned()];
            m
        })
        .collect();
    root
}

fn file(description: &str, seed: u64, qubits: &[&str], processes: Vec<(&str, ActionSpec)>) -> ScenarioFile {
    ScenarioFile {
        description: Some(description.to_owned()),
        seed: Some(seed),
        qubits: qubits.iter().map(|&q| QubitId::from(q)).collect(),
        processes: processes
            .into_iter()
            .map(|(name, root)| ProcessSpec {
                name: name.to_owned(),
                root,
            })
            .collect(),
        initial_state: Some(StateSpec::Basis(0)),
        schedule: Some(ScheduleSpec {
            policy: Some(Policy::Completion),
            overrides: Default::default(),
        }),
    }
}

/// Timings of the three-process scenes: (id, lo, hi) per action.
type Timing = [(&'static str, i64, i64); 8];

const S3_SYNC: Timing = [
    ("A1", 6, 8), ("A2", 14, 16),
    ("B1", 2, 4), ("B2", 10, 12), ("B3", 18, 20),
    ("C1", 6, 8), ("C2", 10, 12), ("C3", 14, 16),
];
const S3_ASYNC: Timing = [
    ("A1", 4, 11), ("A2", 15, 23),
    ("B1", 2, 5), ("B2", 9, 17), ("B3", 21, 24),
    ("C1", 6, 8), ("C2", 12, 14), ("C3", 18, 20),
];

fn three_process(t: &Timing, u: &[OpSpec; 5]) -> Vec<(&'static str, ActionSpec)> {
    let n = |i: usize, q: &[&str], op: &OpSpec| node(t[i].0, t[i].1, t[i].2, q, op.clone());
    let epr = gate("EPR_PREP");
    vec![
        ("A", chain(vec![n(0, &["q1"], &u[0]), n(1, &["q1"], &u[1])])),
        ("B", chain(vec![n(2, &["q2"], &u[2]), n(3, &["q3"], &u[3]), n(4, &["q2"], &u[4])])),
        ("C", chain(vec![n(5, &["q2", "q3"], &epr), n(6, &["q1", "q2"], &epr), n(7, &["q2", "q3"], &epr)])),
    ]
}

/// Adds Z measurements D, E, F at the end of processes A, B, C with the given (lo, hi).
fn measured(mut procs: Vec<(&'static str, ActionSpec)>, dx: [(i64, i64); 3]) -> Vec<(&'static str, ActionSpec)> {
    let spec = [("D", "q1", "meter_A"), ("E", "q2", "meter_B"), ("F", "q3", "meter_C")];
    for (((_, root), (prefix, q, meter)), (lo, hi)) in procs.iter_mut().zip(spec).zip(dx) {
        *root = with_measurement(root.clone(), prefix, q, lo, hi, meter);
    }
    procs
}

/// All bundled scenarios, with single-qubit gates drawn as Haar-random unitaries from `seed`.
pub fn generate(seed: u64) -> Vec<(&'static str, ScenarioFile)> {
    let mut d = Draws {
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let mut out = Vec::new();

    let (a1, a2, b1) = (d.unitary("A1"), d.unitary("A2"), d.unitary("B1"));
    let s1 = |b: (i64, i64)| {
        vec![
            ("A", chain(vec![node("A1", 4, 12, &["q1"], a1.clone()), node("A2", 15, 23, &["q1"], a2.clone())])),
            ("B", node("B1", b.0, b.1, &["q2"], b1.clone())),
        ]
    };
    out.push(("s1", file("A applies A1 then A2 to q1 while B applies B1 to q2; A1 and B1 run in lockstep.", seed, &["q1", "q2"], s1((4, 12)))));
    out.push(("s1_async", file("As s1, but B1 overlaps both A1 and the gap before A2.", seed, &["q1", "q2"], s1((9, 17)))));

    let (a1, b1, a2) = (d.unitary("A1"), d.unitary("B1"), d.unitary("A2"));
    let s2 = |b: (i64, i64)| {
        vec![
            ("A", chain(vec![node("A1", 6, 12, &["q1"], a1.clone()), node("A2", 14, 20, &["q1"], a2.clone())])),
            ("B", node("B1", b.0, b.1, &["q2"], b1.clone())),
            ("C", node("C1", 2, 4, &["q1", "q2"], gate("EPR_PREP"))),
        ]
    };
    out.push(("s2", file("C entangles q1 and q2, then A and B act on their halves in lockstep.", seed, &["q1", "q2"], s2((6, 12)))));
    out.push(("s2_async", file("As s2, but B1 is delayed to overlap A2's start window.", seed, &["q1", "q2"], s2((10, 16)))));

    let u = [d.unitary("A1"), d.unitary("A2"), d.unitary("B1"), d.unitary("B2"), d.unitary("B3")];
    let q3 = ["q1", "q2", "q3"];
    out.push(("s3", file("Three processes; C repeatedly prepares entangled pairs between the others' qubits. Synchronous rounds.", seed, &q3, three_process(&S3_SYNC, &u))));
    out.push(("s3_async", file("As s3 with overlapping, unevenly timed actions.", seed, &q3, three_process(&S3_ASYNC, &u))));
    out.push(("s4", file("s3 followed by a Z measurement of each qubit in its own process.", seed, &q3, measured(three_process(&S3_SYNC, &u), [(22, 24); 3]))));
    out.push(("s4_async", file("s3_async followed by staggered Z measurements.", seed, &q3, measured(three_process(&S3_ASYNC, &u), [(25, 28), (26, 27), (24, 26)]))));

    out.push((
        "nonlocal_overlap",
        file(
            "Two processes apply H and Z to the same qubit over the same interval; the result depends on their order.",
            seed,
            &["q"],
            vec![("A", node("a", 1, 3, &["q"], gate("H"))), ("B", node("b", 1, 3, &["q"], gate("Z")))],
        ),
    ));
    out
}
