//! Brute-force reference evaluators that share no evolution code with the library:
//! a statevector simulator for straight-line circuits and a path-by-path
//! density-matrix evaluator for μ.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_complex::Complex64;
use qatom::dynamics::Schedule;
use qatom::linalg::{ComplexMatrix, DensityOperator, QubitId};
use qatom::model::{ActionId, PartialSystem, Process, System};

type C = Complex64;

/// Dense row-major square matrix.
#[derive(Clone, Debug)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<C>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![C::new(0.0, 0.0); n * n] }
    }

    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let n = m.rows();
        let mut d = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                d.a[r * n + c] = m.get(r, c);
            }
        }
        d
    }

    pub fn from_state(rho: &DensityOperator) -> Self {
        Self::from_matrix(rho.matrix())
    }

    pub fn at(&self, r: usize, c: usize) -> C {
        self.a[r * self.n + c]
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = self.a[i * n + k];
                if x == C::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.a[i * n + j] += x * o.a[k * n + j];
                }
            }
        }
        out
    }

    pub fn dagger(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.a[j * n + i] = self.a[i * n + j].conj();
            }
        }
        out
    }

    pub fn add(&mut self, o: &Self) {
        for (x, y) in self.a.iter_mut().zip(&o.a) {
            *x += y;
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.a[i * self.n + i].re).sum()
    }

    pub fn max_diff(&self, o: &Self) -> f64 {
        self.a.iter().zip(&o.a).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }
}

/// The operator `k` acting on `targets` (positions in an `n`-qubit big-endian register).
pub fn lift(k: &Dense, targets: &[usize], n: usize) -> Dense {
    let dim = 1usize << n;
    let bit = |x: usize, q: usize| (x >> (n - 1 - q)) & 1;
    let sub = |x: usize| targets.iter().fold(0, |acc, &q| (acc << 1) | bit(x, q));
    let rest_mask: usize = (0..n)
        .filter(|q| !targets.contains(q))
        .map(|q| 1usize << (n - 1 - q))
        .sum();
    let mut out = Dense::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            if r & rest_mask == c & rest_mask {
                out.a[r * dim + c] = k.at(sub(r), sub(c));
            }
        }
    }
    out
}

fn positions(reg: &[QubitId], all: &[QubitId]) -> Vec<usize> {
    reg.iter().map(|q| all.iter().position(|x| x == q).expect("qubit in system")).collect()
}

/// Every root-to-leaf node path of `p`.
fn leaf_paths(p: &Process, node: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    prefix.push(node);
    if p.children(node).is_empty() {
        out.push(prefix.clone());
    } else {
        for &k in p.children(node) {
            leaf_paths(p, k, prefix, out);
        }
    }
    prefix.pop();
}

/// Maximal paths through every anchor of `c`, as node lists per process.
pub fn paths_through(s: &System, c: &PartialSystem) -> Vec<Vec<Vec<usize>>> {
    let mut tuples = vec![Vec::new()];
    for (pi, p) in s.processes().iter().enumerate() {
        let mut all = Vec::new();
        leaf_paths(p, p.root(), &mut Vec::new(), &mut all);
        let anchor = c.anchor(pi);
        let mine: Vec<Vec<usize>> = all.into_iter().filter(|path| path.contains(&anchor)).collect();
        tuples = tuples
            .into_iter()
            .flat_map(|t: Vec<Vec<usize>>| {
                mine.iter().map(move |path| {
                    let mut t = t.clone();
                    t.push(path.clone());
                    t
                })
            })
            .collect();
    }
    tuples
}

/// The same paths as sets of action ids, for exact comparisons.
pub fn path_set(s: &System, c: &PartialSystem) -> BTreeSet<Vec<Vec<ActionId>>> {
    paths_through(s, c)
        .into_iter()
        .map(|t| {
            t.iter()
                .enumerate()
                .map(|(pi, path)| path.iter().map(|&n| s.process(pi).action(n).id().clone()).collect())
                .collect()
        })
        .collect()
}

/// Applies every action of one path tuple in order of (τ, process), starting from `rho`.
pub fn run_path(s: &System, tuple: &[Vec<usize>], sched: &Schedule, rho: &Dense) -> Dense {
    let n = s.qubits().len();
    let mut events: Vec<(f64, usize, usize)> = Vec::new();
    for (pi, path) in tuple.iter().enumerate() {
        for &node in path {
            let a = s.process(pi).action(node);
            events.push((sched.tau(a.id()).expect("scheduled").to_f64(), pi, node));
        }
    }
    events.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let mut state = rho.clone();
    for (_, pi, node) in events {
        let a = s.process(pi).action(node);
        let targets = positions(a.register(), s.qubits());
        let mut next = Dense::zeros(state.n);
        for k in a.operation().kraus() {
            let big = lift(&Dense::from_matrix(k), &targets, n);
            next.add(&big.mul(&state).mul(&big.dagger()));
        }
        state = next;
    }
    state
}

/// μ(ω(C)) as the sum over its maximal paths of the trace after running that path.
pub fn mu_by_paths(s: &System, c: &PartialSystem, sched: &Schedule, rho: &DensityOperator) -> f64 {
    let r = Dense::from_state(rho);
    paths_through(s, c).iter().map(|t| run_path(s, t, sched, &r).trace()).sum()
}

/// Pure-state simulator for straight-line circuits.
#[derive(Clone, Debug)]
pub struct Statevector {
    pub n: usize,
    pub amp: Vec<C>,
}

impl Statevector {
    pub fn basis(n: usize, i: usize) -> Self {
        let mut amp = vec![C::new(0.0, 0.0); 1 << n];
        amp[i] = C::new(1.0, 0.0);
        Self { n, amp }
    }

    pub fn from_amplitudes(amp: Vec<C>) -> Self {
        let n = amp.len().trailing_zeros() as usize;
        Self { n, amp }
    }

    /// Applies a 2^k × 2^k matrix to the listed qubits (first listed = most significant).
    pub fn apply(&mut self, u: &Dense, targets: &[usize]) {
        let k = targets.len();
        let shift = |q: usize| self.n - 1 - q;
        let mask: usize = targets.iter().map(|&q| 1usize << shift(q)).sum();
        let mut out = vec![C::new(0.0, 0.0); self.amp.len()];
        for base in (0..self.amp.len()).filter(|x| x & mask == 0) {
            let idx = |s: usize| {
                (0..k).fold(base, |acc, j| if (s >> (k - 1 - j)) & 1 == 1 { acc | (1 << shift(targets[j])) } else { acc })
            };
            for r in 0..1 << k {
                let mut z = C::new(0.0, 0.0);
                for c in 0..1 << k {
                    z += u.at(r, c) * self.amp[idx(c)];
                }
                out[idx(r)] = z;
            }
        }
        self.amp = out;
    }

    /// Zeroes the amplitudes where qubit `q` differs from `m`.
    pub fn project(&mut self, q: usize, m: usize) {
        let s = self.n - 1 - q;
        for (i, a) in self.amp.iter_mut().enumerate() {
            if (i >> s) & 1 != m {
                *a = C::new(0.0, 0.0);
            }
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum()
    }

    /// |ψ⟩⟨ψ| without normalization.
    pub fn density(&self) -> Dense {
        let d = self.amp.len();
        let mut out = Dense::zeros(d);
        for r in 0..d {
            for c in 0..d {
                out.a[r * d + c] = self.amp[r] * self.amp[c].conj();
            }
        }
        out
    }
}

/// C|xy⟩ = (|0,y⟩ + (−1)^x |1,1−y⟩)/√2, written out column by column.
pub fn epr_prep() -> Dense {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = Dense::zeros(4);
    for x in 0..2 {
        for y in 0..2 {
            let col = 2 * x + y;
            let sign = if x == 0 { 1.0 } else { -1.0 };
            m.a[y * 4 + col] = C::new(h, 0.0);
            m.a[(2 + (1 - y)) * 4 + col] = C::new(sign * h, 0.0);
        }
    }
    m
}

/// The single Kraus operator of a unitary action, looked up by id.
pub fn unitary_of(s: &System, id: &str) -> Dense {
    let a = s.action_by_id(&id.into()).expect("action exists");
    let k = a.operation().kraus();
    assert_eq!(k.len(), 1, "{id} is not unitary");
    Dense::from_matrix(&k[0])
}
