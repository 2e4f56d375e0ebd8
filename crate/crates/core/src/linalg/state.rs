use num_complex::Complex64;

use super::register::{check_distinct, permute, same_set};
use super::{ComplexMatrix, LinalgError, QubitId, VALIDITY_TOL};

/// Subnormalized density operator on an ordered register.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    register: Vec<QubitId>,
    matrix: ComplexMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StateReport {
    pub hermitian: bool,
    pub psd: bool,
    pub trace_in_range: bool,
}

impl StateReport {
    pub fn ok(&self) -> bool {
        self.hermitian && self.psd && self.trace_in_range
    }
}

impl DensityOperator {
    /// Validated constructor.
    pub fn new(register: Vec<QubitId>, matrix: ComplexMatrix) -> Result<Self, LinalgError> {
        let rho = Self::from_parts(register, matrix)?;
        let report = rho.validate();
        if !report.ok() {
            return Err(LinalgError::InvalidState(format!("{report:?}")));
        }
        Ok(rho)
    }

    /// Shape-checked but otherwise unvalidated constructor for intermediate results.
    pub fn from_parts(register: Vec<QubitId>, matrix: ComplexMatrix) -> Result<Self, LinalgError> {
        check_distinct(&register)?;
        let dim = 1usize << register.len();
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(LinalgError::Dimension(format!(
                "{}x{} matrix for {} qubits",
                matrix.rows(),
                matrix.cols(),
                register.len()
            )));
        }
        Ok(Self { register, matrix })
    }

    /// |ψ⟩⟨ψ| for a normalized amplitude vector.
    pub fn pure(register: Vec<QubitId>, amplitudes: &[Complex64]) -> Result<Self, LinalgError> {
        let dim = 1usize << register.len();
        if amplitudes.len() != dim {
            return Err(LinalgError::Dimension(format!(
                "{} amplitudes for {} qubits",
                amplitudes.len(),
                register.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > VALIDITY_TOL {
            return Err(LinalgError::InvalidState(format!("amplitude norm² {norm}")));
        }
        Self::from_parts(register, ComplexMatrix::outer(amplitudes))
    }

    /// Computational basis state |index⟩⟨index| (big-endian over the register).
    pub fn basis(register: Vec<QubitId>, index: usize) -> Result<Self, LinalgError> {
        let dim = 1usize << register.len();
        if index >= dim {
            return Err(LinalgError::Dimension(format!("basis index {index} >= {dim}")));
        }
        Self::from_parts(register, ComplexMatrix::unit(dim, index, index))
    }

    pub fn zero(register: Vec<QubitId>) -> Self {
        let dim = 1usize << register.len();
        Self {
            register,
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn register(&self) -> &[QubitId] {
        &self.register
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn validate(&self) -> StateReport {
        let hermitian = self.matrix.is_hermitian(VALIDITY_TOL);
        let psd = hermitian && self.matrix.min_hermitian_eigenvalue() >= -VALIDITY_TOL;
        let tr = self.trace();
        StateReport {
            hermitian,
            psd,
            trace_in_range: (-VALIDITY_TOL..=1.0 + VALIDITY_TOL).contains(&tr),
        }
    }

    /// Entrywise sum; registers must match exactly.
    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.register != other.register {
            return Err(LinalgError::Register("sum of states on different registers".into()));
        }
        Ok(Self {
            register: self.register.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            register: self.register.clone(),
            matrix: self.matrix.scale_real(s),
        }
    }

    /// ρ ⊗ σ on the concatenated register.
    pub fn tensor(&self, other: &Self) -> Result<Self, LinalgError> {
        let mut reg = self.register.clone();
        reg.extend(other.register.iter().cloned());
        check_distinct(&reg)?;
        Ok(Self {
            register: reg,
            matrix: self.matrix.kron(&other.matrix),
        })
    }

    /// Same state with indices rewritten for another ordering of the same qubits.
    pub fn reordered(&self, register: &[QubitId]) -> Result<Self, LinalgError> {
        if !same_set(&self.register, register) {
            return Err(LinalgError::Register("reorder to a different qubit set".into()));
        }
        Ok(Self {
            register: register.to_vec(),
            matrix: permute(&self.matrix, &self.register, register)?,
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.register != other.register {
            return f64::INFINITY;
        }
        self.matrix.max_abs_diff(&other.matrix)
    }
}

/// Sum of the diagonal's real parts.
pub fn trace(rho: &DensityOperator) -> f64 {
    rho.trace()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::register;

    fn plus() -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityOperator::pure(register(&["q"]), &[Complex64::new(s, 0.0); 2]).unwrap()
    }

    #[test]
    fn trace_of_ground_state_is_one() {
        let rho = DensityOperator::basis(register(&["q"]), 0).unwrap();
        assert_eq!(trace(&rho), 1.0);
    }

    #[test]
    fn trace_of_zero_is_zero() {
        assert_eq!(trace(&DensityOperator::zero(register(&["a", "b"]))), 0.0);
    }

    #[test]
    fn mixture_quarter_ground_half_plus() {
        let g = DensityOperator::basis(register(&["q"]), 0).unwrap();
        let rho = g.scale(0.25).add(&plus().scale(0.5)).unwrap();
        assert!((trace(&rho) - 0.75).abs() < 1e-12);
        let want = ComplexMatrix::from_real(&[&[0.5, 0.25], &[0.25, 0.25]]).unwrap();
        assert!(rho.matrix().approx_eq(&want, 1e-12));
        assert!(rho.validate().ok());
    }

    #[test]
    fn rejects_non_psd() {
        let m = ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, -0.5]]).unwrap();
        let err = DensityOperator::new(register(&["q"]), m).unwrap_err();
        assert!(matches!(err, LinalgError::InvalidState(_)));
    }

    #[test]
    fn rejects_trace_above_one() {
        let m = ComplexMatrix::identity(2);
        assert!(DensityOperator::new(register(&["q"]), m).is_err());
    }

    #[test]
    fn reordering_swaps_tensor_factors() {
        let a = DensityOperator::basis(register(&["a"]), 1).unwrap();
        let b = DensityOperator::basis(register(&["b"]), 0).unwrap();
        let ab = a.tensor(&b).unwrap();
        let ba = b.tensor(&a).unwrap();
        assert_eq!(ab.reordered(&register(&["b", "a"])).unwrap(), ba);
    }

    #[test]
    fn unnormalized_amplitudes_rejected() {
        let amps = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(DensityOperator::pure(register(&["q"]), &amps).is_err());
    }
}
