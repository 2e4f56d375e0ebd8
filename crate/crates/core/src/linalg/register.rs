use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, LinalgError};

/// Name of one qubit wire.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitId(String);

impl QubitId {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for QubitId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl From<String> for QubitId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

/// Shorthand for building a register from string names.
pub fn register(names: &[&str]) -> Vec<QubitId> {
    names.iter().map(|&n| QubitId::from(n)).collect()
}

pub(crate) fn check_distinct(reg: &[QubitId]) -> Result<(), LinalgError> {
    let mut seen = HashSet::new();
    for q in reg {
        if !seen.insert(q) {
            return Err(LinalgError::Register(format!("qubit {q} listed twice")));
        }
    }
    Ok(())
}

pub(crate) fn same_set(a: &[QubitId], b: &[QubitId]) -> bool {
    a.len() == b.len() && a.iter().all(|q| b.contains(q))
}

/// Sorted union of two registers.
pub fn register_union(a: &[QubitId], b: &[QubitId]) -> Vec<QubitId> {
    let mut out: Vec<QubitId> = a.to_vec();
    for q in b {
        if !out.contains(q) {
            out.push(q.clone());
        }
    }
    out.sort();
    out
}

/// Positions of `sub` inside `target`, or an error naming the first missing qubit.
pub(crate) fn positions(sub: &[QubitId], target: &[QubitId]) -> Result<Vec<usize>, LinalgError> {
    sub.iter()
        .map(|q| {
            target
                .iter()
                .position(|t| t == q)
                .ok_or_else(|| LinalgError::Register(format!("qubit {q} not in register")))
        })
        .collect()
}

/// Extends `m` (acting on `op_reg`, big-endian) to `target` with identity on the other qubits.
pub fn embed(
    m: &ComplexMatrix,
    op_reg: &[QubitId],
    target: &[QubitId],
) -> Result<ComplexMatrix, LinalgError> {
    let k = op_reg.len();
    if m.rows() != 1 << k || m.cols() != 1 << k {
        return Err(LinalgError::Dimension(format!(
            "{}x{} matrix on {k} qubits",
            m.rows(),
            m.cols()
        )));
    }
    if op_reg == target {
        return Ok(m.clone());
    }
    let pos = positions(op_reg, target)?;
    let n = target.len();
    let dim = 1usize << n;
    let op_mask: usize = pos.iter().map(|&p| 1usize << (n - 1 - p)).sum();
    let sub = |i: usize| -> usize {
        pos.iter()
            .enumerate()
            .map(|(j, &p)| ((i >> (n - 1 - p)) & 1) << (k - 1 - j))
            .sum()
    };
    let subs: Vec<usize> = (0..dim).map(sub).collect();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            if (i & !op_mask) == (j & !op_mask) {
                out.set(i, j, m.get(subs[i], subs[j]));
            }
        }
    }
    Ok(out)
}

/// Rewrites a matrix on register `from` into the index order of `to` (same qubit set).
pub fn permute(
    m: &ComplexMatrix,
    from: &[QubitId],
    to: &[QubitId],
) -> Result<ComplexMatrix, LinalgError> {
    if !same_set(from, to) {
        return Err(LinalgError::Register("permutation between different qubit sets".into()));
    }
    embed(m, from, to)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    #[test]
    fn embed_matches_kron_in_both_positions() {
        let target = register(&["a", "b"]);
        let on_a = embed(&x(), &register(&["a"]), &target).unwrap();
        let on_b = embed(&x(), &register(&["b"]), &target).unwrap();
        assert_eq!(on_a, x().kron(&ComplexMatrix::identity(2)));
        assert_eq!(on_b, ComplexMatrix::identity(2).kron(&x()));
    }

    #[test]
    fn embed_reorders_two_qubit_operator() {
        // CNOT with control b, target a, embedded into (a, b, c).
        let cnot = ComplexMatrix::from_real(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        let e = embed(&cnot, &register(&["b", "a"]), &register(&["a", "b", "c"])).unwrap();
        // |0 1 c> -> |1 1 c>
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(e.get(0b110, 0b010), one);
        assert_eq!(e.get(0b111, 0b011), one);
        assert_eq!(e.get(0b000, 0b000), one);
    }

    #[test]
    fn embed_rejects_missing_qubit() {
        assert!(embed(&x(), &register(&["z"]), &register(&["a"])).is_err());
    }

    #[test]
    fn union_is_sorted() {
        let u = register_union(&register(&["q2", "q0"]), &register(&["q1", "q0"]));
        assert_eq!(u, register(&["q0", "q1", "q2"]));
    }
}
