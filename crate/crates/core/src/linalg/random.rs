//! Seeded random matrices, states and channels.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{ComplexMatrix, DensityOperator, OpKind, QuantumOperation, QubitId};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed unitary: Gram-Schmidt on a complex Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        cols.push(v.into_iter().map(|x| x / norm).collect());
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (c, col) in cols.iter().enumerate() {
        for (r, x) in col.iter().enumerate() {
            m.set(r, c, *x);
        }
    }
    m
}

/// Uniformly random normalized amplitude vector.
pub fn random_amplitudes<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

pub fn random_pure_state<R: Rng + ?Sized>(register: Vec<QubitId>, rng: &mut R) -> DensityOperator {
    let amps = random_amplitudes(1 << register.len(), rng);
    DensityOperator::pure(register, &amps).expect("normalized by construction")
}

/// Random mixed state of unit trace with `rank` pure components.
pub fn random_density<R: Rng + ?Sized>(
    register: Vec<QubitId>,
    rank: usize,
    rng: &mut R,
) -> DensityOperator {
    let dim = 1 << register.len();
    let weights: Vec<f64> = (0..rank.max(1)).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let mut m = ComplexMatrix::zeros(dim, dim);
    for w in weights {
        let v = random_amplitudes(dim, rng);
        m = &m + &ComplexMatrix::outer(&v).scale_real(w / total);
    }
    DensityOperator::from_parts(register, m).expect("shape")
}

/// Random trace-preserving channel with `n_kraus` Kraus operators, cut from a Haar isometry.
pub fn random_channel<R: Rng + ?Sized>(
    register: Vec<QubitId>,
    n_kraus: usize,
    rng: &mut R,
) -> QuantumOperation {
    let d = 1usize << register.len();
    let k = n_kraus.max(1);
    let big = haar_unitary(d * k, rng);
    let kraus = (0..k)
        .map(|b| {
            let mut e = ComplexMatrix::zeros(d, d);
            for r in 0..d {
                for c in 0..d {
                    e.set(r, c, big.get(b * d + r, c));
                }
            }
            e
        })
        .collect();
    let kind = if k == 1 { OpKind::Unitary } else { OpKind::General };
    QuantumOperation::from_kraus(register, kraus, kind).expect("isometry blocks form a channel")
}

/// Random trace-non-increasing operation: a random channel with some Kraus operators dropped.
pub fn random_operation<R: Rng + ?Sized>(register: Vec<QubitId>, rng: &mut R) -> QuantumOperation {
    let n = rng.random_range(1..=3);
    let full = random_channel(register.clone(), n, rng);
    let keep: Vec<ComplexMatrix> = full
        .kraus()
        .iter()
        .filter(|_| rng.random_bool(0.7))
        .cloned()
        .collect();
    if keep.is_empty() || keep.len() == full.kraus().len() {
        return full;
    }
    QuantumOperation::from_kraus(register, keep, OpKind::General).expect("subset of a channel")
}
