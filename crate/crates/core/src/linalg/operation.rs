use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::register::{check_distinct, embed, permute, register_union, same_set};
use super::{ComplexMatrix, DensityOperator, LinalgError, QubitId, VALIDITY_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpKind {
    Unitary,
    PartialMeasurement,
    General,
}

impl OpKind {
    fn combine(a: Self, b: Self) -> Self {
        use OpKind::*;
        match (a, b) {
            (Unitary, Unitary) => Unitary,
            (General, _) | (_, General) => General,
            _ => PartialMeasurement,
        }
    }
}

/// Quantum operation on a named register, given by its Kraus list.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumOperation {
    register: Vec<QubitId>,
    kraus: Vec<ComplexMatrix>,
    kind: OpKind,
    label: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidityReport {
    pub cp_ok: bool,
    pub trace_nonincreasing_ok: bool,
    pub trace_preserving: bool,
    pub unitary: bool,
}

impl ValidityReport {
    pub fn valid(&self) -> bool {
        self.cp_ok && self.trace_nonincreasing_ok
    }
}

impl QuantumOperation {
    /// Builds an operation from a Kraus list, checking shapes, the kind and
    /// 0 ⊑ Σ E†E ⊑ Id. Complete positivity is not rechecked (Kraus form is CP).
    pub fn from_kraus(
        register: Vec<QubitId>,
        kraus: Vec<ComplexMatrix>,
        kind: OpKind,
    ) -> Result<Self, LinalgError> {
        let op = Self::from_parts(register, kraus, kind)?;
        let report = op.validity(false);
        if !report.trace_nonincreasing_ok {
            return Err(LinalgError::InvalidOperation(
                "Kraus sum is not below the identity".into(),
            ));
        }
        if kind == OpKind::Unitary && !report.unitary {
            return Err(LinalgError::InvalidOperation(
                "kind=unitary needs exactly one unitary Kraus matrix".into(),
            ));
        }
        Ok(op)
    }

    /// Import path for user-supplied data: like `from_kraus` plus a Choi-matrix CP check.
    pub fn import_kraus(
        register: Vec<QubitId>,
        kraus: Vec<ComplexMatrix>,
        kind: OpKind,
    ) -> Result<Self, LinalgError> {
        let op = Self::from_kraus(register, kraus, kind)?;
        if !op.validity(true).cp_ok {
            return Err(LinalgError::InvalidOperation("Choi matrix is not PSD".into()));
        }
        Ok(op)
    }

    /// Recovers a Kraus list from a Choi matrix C = Σ_ij |i⟩⟨j| ⊗ ℰ(|i⟩⟨j|).
    pub fn from_choi(register: Vec<QubitId>, choi: &ComplexMatrix) -> Result<Self, LinalgError> {
        let d = 1usize << register.len();
        if choi.rows() != d * d || choi.cols() != d * d {
            return Err(LinalgError::Dimension(format!(
                "Choi matrix must be {0}x{0}",
                d * d
            )));
        }
        if !choi.is_hermitian(VALIDITY_TOL) {
            return Err(LinalgError::InvalidOperation("Choi matrix not Hermitian".into()));
        }
        let (vals, vecs) = choi.hermitian_eigen_decomposition();
        if vals.iter().any(|&l| l < -VALIDITY_TOL) {
            return Err(LinalgError::InvalidOperation("Choi matrix is not PSD".into()));
        }
        let mut kraus = Vec::new();
        for (l, v) in vals.iter().zip(&vecs) {
            if *l <= VALIDITY_TOL {
                continue;
            }
            let s = l.sqrt();
            let mut e = ComplexMatrix::zeros(d, d);
            for i in 0..d {
                for r in 0..d {
                    e.set(r, i, v[i * d + r] * s);
                }
            }
            kraus.push(e);
        }
        if kraus.is_empty() {
            kraus.push(ComplexMatrix::zeros(d, d));
        }
        Self::from_kraus(register, kraus, OpKind::General)
    }

    fn from_parts(
        register: Vec<QubitId>,
        kraus: Vec<ComplexMatrix>,
        kind: OpKind,
    ) -> Result<Self, LinalgError> {
        check_distinct(&register)?;
        if kraus.is_empty() {
            return Err(LinalgError::InvalidOperation("empty Kraus list".into()));
        }
        let d = 1usize << register.len();
        for (k, e) in kraus.iter().enumerate() {
            if e.rows() != d || e.cols() != d {
                return Err(LinalgError::Dimension(format!(
                    "Kraus matrix {k} is {}x{}, register needs {d}x{d}",
                    e.rows(),
                    e.cols()
                )));
            }
        }
        Ok(Self {
            register,
            kraus,
            kind,
            label: None,
        })
    }

    pub fn unitary(register: Vec<QubitId>, u: ComplexMatrix) -> Result<Self, LinalgError> {
        Self::from_kraus(register, vec![u], OpKind::Unitary)
    }

    pub fn identity(register: Vec<QubitId>) -> Self {
        let d = 1usize << register.len();
        Self {
            register,
            kraus: vec![ComplexMatrix::identity(d)],
            kind: OpKind::Unitary,
            label: Some("I".into()),
        }
    }

    pub fn standard(gate: &StandardGate, register: Vec<QubitId>) -> Result<Self, LinalgError> {
        if register.len() != gate.arity() {
            return Err(LinalgError::Arity {
                name: gate.to_string(),
                expected: gate.arity(),
                found: register.len(),
            });
        }
        let (kraus, kind) = gate.kraus();
        let mut op = Self::from_kraus(register, kraus, kind)?;
        op.label = Some(gate.to_string());
        Ok(op)
    }

    /// `standard` with the gate given by name, e.g. `"H"` or `"MEASURE_Z(0)"`.
    pub fn named(name: &str, register: Vec<QubitId>) -> Result<Self, LinalgError> {
        Self::standard(&name.parse()?, register)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn register(&self) -> &[QubitId] {
        &self.register
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn kind(&self) -> OpKind {
        self.kind
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        1 << self.register.len()
    }

    /// Σ_k E_k†E_k.
    pub fn gram(&self) -> ComplexMatrix {
        let d = self.dim();
        self.kraus
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, e| &acc + &e.adjoint().matmul(e))
    }

    pub fn choi(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut c = ComplexMatrix::zeros(d * d, d * d);
        for e in &self.kraus {
            for i in 0..d {
                for j in 0..d {
                    for r in 0..d {
                        let a = e.get(r, i);
                        if a.norm_sqr() == 0.0 {
                            continue;
                        }
                        for col in 0..d {
                            let v = c.get(i * d + r, j * d + col) + a * e.get(col, j).conj();
                            c.set(i * d + r, j * d + col, v);
                        }
                    }
                }
            }
        }
        c
    }

    fn validity(&self, with_choi: bool) -> ValidityReport {
        let d = self.dim();
        let gram = self.gram();
        let id = ComplexMatrix::identity(d);
        let trace_preserving = gram.max_abs_diff(&id) <= VALIDITY_TOL;
        let trace_nonincreasing_ok = gram.is_hermitian(VALIDITY_TOL)
            && gram.min_hermitian_eigenvalue() >= -VALIDITY_TOL
            && (&id - &gram).min_hermitian_eigenvalue() >= -VALIDITY_TOL;
        let unitary = self.kraus.len() == 1 && trace_preserving;
        let cp_ok = !with_choi || self.choi().min_hermitian_eigenvalue() >= -VALIDITY_TOL;
        ValidityReport {
            cp_ok,
            trace_nonincreasing_ok,
            trace_preserving,
            unitary,
        }
    }

    /// Kraus list extended to `target` (identity elsewhere).
    pub fn embedded_kraus(&self, target: &[QubitId]) -> Result<Vec<ComplexMatrix>, LinalgError> {
        self.kraus
            .iter()
            .map(|e| embed(e, &self.register, target))
            .collect()
    }

    /// Same map expressed on a reordering of its register.
    pub fn reordered(&self, register: &[QubitId]) -> Result<Self, LinalgError> {
        if !same_set(&self.register, register) {
            return Err(LinalgError::Register("reorder to a different qubit set".into()));
        }
        let kraus = self
            .kraus
            .iter()
            .map(|e| permute(e, &self.register, register))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            register: register.to_vec(),
            kraus,
            kind: self.kind,
            label: self.label.clone(),
        })
    }

    /// Kraus lists equal entrywise within `tol`, same order, same register order.
    pub fn kraus_eq(&self, other: &Self, tol: f64) -> bool {
        self.register == other.register
            && self.kraus.len() == other.kraus.len()
            && self
                .kraus
                .iter()
                .zip(&other.kraus)
                .all(|(a, b)| a.max_abs_diff(b) <= tol)
    }

    /// Concatenated Kraus lists of operations on a common register: the map Σ ℰ_i.
    pub fn kraus_sum<'a>(
        ops: impl IntoIterator<Item = &'a QuantumOperation>,
    ) -> Result<Self, LinalgError> {
        let mut iter = ops.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| LinalgError::InvalidOperation("sum of no operations".into()))?;
        let mut kraus = first.kraus.clone();
        for op in iter {
            let k = if op.register == first.register {
                op.kraus.clone()
            } else {
                op.reordered(&first.register)?.kraus
            };
            kraus.extend(k);
        }
        Self::from_parts(first.register.clone(), kraus, OpKind::General)
    }
}

pub fn check_validity(op: &QuantumOperation) -> ValidityReport {
    op.validity(true)
}

/// Σ_k Ẽ_k ρ Ẽ_k† with each E_k extended to ρ's register.
pub fn apply(op: &QuantumOperation, rho: &DensityOperator) -> Result<DensityOperator, LinalgError> {
    let kraus = op.embedded_kraus(rho.register())?;
    Ok(apply_embedded(&kraus, rho))
}

/// `apply` for a Kraus list that is already on ρ's register.
pub fn apply_embedded(kraus: &[ComplexMatrix], rho: &DensityOperator) -> DensityOperator {
    let d = rho.dim();
    let m = kraus.iter().fold(ComplexMatrix::zeros(d, d), |acc, e| {
        &acc + &e.sandwich(rho.matrix())
    });
    DensityOperator::from_parts(rho.register().to_vec(), m).expect("shape preserved")
}

/// a ⊗ b on the concatenated register.
pub fn tensor(a: &QuantumOperation, b: &QuantumOperation) -> Result<QuantumOperation, LinalgError> {
    if a.register.iter().any(|q| b.register.contains(q)) {
        return Err(LinalgError::Register("tensor of overlapping registers".into()));
    }
    let mut register = a.register.clone();
    register.extend(b.register.iter().cloned());
    let kraus = a
        .kraus
        .iter()
        .flat_map(|x| b.kraus.iter().map(move |y| x.kron(y)))
        .collect();
    QuantumOperation::from_parts(register, kraus, OpKind::combine(a.kind, b.kind))
}

/// `first` then `second`, on the sorted union of their registers.
pub fn compose(
    second: &QuantumOperation,
    first: &QuantumOperation,
) -> Result<QuantumOperation, LinalgError> {
    let register = register_union(&second.register, &first.register);
    let s = second.embedded_kraus(&register)?;
    let f = first.embedded_kraus(&register)?;
    let mut kraus: Vec<ComplexMatrix> = s
        .iter()
        .flat_map(|x| f.iter().map(move |y| x.matmul(y)))
        .filter(|m| m.max_abs() > 0.0)
        .collect();
    if kraus.is_empty() {
        let d = 1 << register.len();
        kraus.push(ComplexMatrix::zeros(d, d));
    }
    QuantumOperation::from_parts(register, kraus, OpKind::combine(second.kind, first.kind))
}

/// Named operations available in scenarios and the library.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StandardGate {
    I,
    X,
    Y,
    Z,
    H,
    S,
    T,
    Cnot,
    Cz,
    Swap,
    EprPrep,
    /// Projective Z measurement restricted to the listed outcomes.
    MeasureZ(Vec<u8>),
}

impl StandardGate {
    pub fn arity(&self) -> usize {
        match self {
            Self::Cnot | Self::Cz | Self::Swap | Self::EprPrep => 2,
            _ => 1,
        }
    }

    fn kraus(&self) -> (Vec<ComplexMatrix>, OpKind) {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let r = |rows: &[&[f64]]| ComplexMatrix::from_real(rows).expect("literal");
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = match self {
            Self::I => ComplexMatrix::identity(2),
            Self::X => r(&[&[0.0, 1.0], &[1.0, 0.0]]),
            Self::Y => ComplexMatrix::from_rows(vec![
                vec![c(0.0, 0.0), c(0.0, -1.0)],
                vec![c(0.0, 1.0), c(0.0, 0.0)],
            ])
            .expect("literal"),
            Self::Z => r(&[&[1.0, 0.0], &[0.0, -1.0]]),
            Self::H => r(&[&[h, h], &[h, -h]]),
            Self::S => ComplexMatrix::from_rows(vec![
                vec![c(1.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(0.0, 1.0)],
            ])
            .expect("literal"),
            Self::T => ComplexMatrix::from_rows(vec![
                vec![c(1.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
            ])
            .expect("literal"),
            Self::Cnot => cnot(),
            Self::Cz => r(&[
                &[1.0, 0.0, 0.0, 0.0],
                &[0.0, 1.0, 0.0, 0.0],
                &[0.0, 0.0, 1.0, 0.0],
                &[0.0, 0.0, 0.0, -1.0],
            ]),
            Self::Swap => r(&[
                &[1.0, 0.0, 0.0, 0.0],
                &[0.0, 0.0, 1.0, 0.0],
                &[0.0, 1.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 1.0],
            ]),
            Self::EprPrep => cnot().matmul(&r(&[&[h, h], &[h, -h]]).kron(&ComplexMatrix::identity(2))),
            Self::MeasureZ(outcomes) => {
                let kraus = outcomes
                    .iter()
                    .map(|&m| ComplexMatrix::unit(2, m as usize, m as usize))
                    .collect();
                return (kraus, OpKind::PartialMeasurement);
            }
        };
        (vec![u], OpKind::Unitary)
    }
}

fn cnot() -> ComplexMatrix {
    ComplexMatrix::from_real(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 1.0, 0.0],
    ])
    .expect("literal")
}

impl fmt::Display for StandardGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::I => "I",
            Self::X => "X",
            Self::Y => "Y",
            Self::Z => "Z",
            Self::H => "H",
            Self::S => "S",
            Self::T => "T",
            Self::Cnot => "CNOT",
            Self::Cz => "CZ",
            Self::Swap => "SWAP",
            Self::EprPrep => "EPR_PREP",
            Self::MeasureZ(o) => {
                let list: Vec<String> = o.iter().map(u8::to_string).collect();
                return write!(f, "MEASURE_Z({})", list.join(","));
            }
        };
        f.write_str(s)
    }
}

impl FromStr for StandardGate {
    type Err = LinalgError;

    /// Accepts `H`, `CNOT`, ..., and `MEASURE_Z(0)`, `MEASURE_Z(0,1)`; bare `MEASURE_Z` means both outcomes.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("MEASURE_Z") {
            let inner = rest.trim();
            if inner.is_empty() {
                return Ok(Self::MeasureZ(vec![0, 1]));
            }
            let inner = inner
                .strip_prefix('(')
                .and_then(|x| x.strip_suffix(')'))
                .ok_or_else(|| LinalgError::UnknownOperation(s.into()))?;
            let outcomes = inner
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse::<u8>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| LinalgError::UnknownOperation(s.into()))?;
            return Self::measure_z(outcomes);
        }
        Ok(match s {
            "I" | "ID" => Self::I,
            "X" => Self::X,
            "Y" => Self::Y,
            "Z" => Self::Z,
            "H" => Self::H,
            "S" => Self::S,
            "T" => Self::T,
            "CNOT" | "CX" => Self::Cnot,
            "CZ" => Self::Cz,
            "SWAP" => Self::Swap,
            "EPR_PREP" => Self::EprPrep,
            _ => return Err(LinalgError::UnknownOperation(s.into())),
        })
    }
}

impl StandardGate {
    pub fn measure_z(mut outcomes: Vec<u8>) -> Result<Self, LinalgError> {
        outcomes.sort_unstable();
        outcomes.dedup();
        if outcomes.is_empty() || outcomes.iter().any(|&m| m > 1) {
            return Err(LinalgError::UnknownOperation(format!(
                "MEASURE_Z outcomes {outcomes:?}"
            )));
        }
        Ok(Self::MeasureZ(outcomes))
    }
}
