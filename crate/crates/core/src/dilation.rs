//! Unitary realizations of the entangling measurement.
//!
//! Basis states of object A, apparatus B and internal subsystem D are indexed
//! with A slowest and D fastest. Indices are zero-based, so the apparatus
//! ground state written `|1⟩` elsewhere is index 0 here.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extops::{extended_entangling, extended_entangling_abd, psi_from_unitary, ExtendedSuperoperator};
use crate::qmat::{ComplexMatrix, StateVector, TOL_EIG};
use crate::superop::{projective, EntanglementMatrix};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Unitary on a product space.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryGate {
    dims: Vec<usize>,
    matrix: ComplexMatrix,
}

impl UnitaryGate {
    pub fn new(dims: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        let n: usize = dims.iter().product();
        if dims.is_empty() || matrix.rows() != n || matrix.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "gate on {dims:?} needs a {n}x{n} matrix, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let dev = matrix.unitarity_error();
        if dev > TOL_EIG {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self { dims, matrix })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn unitarity_error(&self) -> f64 {
        self.matrix.unitarity_error()
    }

    /// `self · first` on the same space.
    pub fn after(&self, first: &UnitaryGate) -> Result<UnitaryGate> {
        if self.dims != first.dims {
            return Err(Error::DimensionMismatch("gates act on different spaces".into()));
        }
        Ok(Self {
            dims: self.dims.clone(),
            matrix: &self.matrix * &first.matrix,
        })
    }

    /// `self ⊗ I` on an appended subsystem of dimension `d`.
    pub fn then_identity(&self, d: usize) -> UnitaryGate {
        let mut dims = self.dims.clone();
        dims.push(d);
        Self {
            dims,
            matrix: self.matrix.kron(&ComplexMatrix::identity(d)),
        }
    }

    /// `I ⊗ self` on a prepended subsystem of dimension `d`.
    pub fn after_identity(&self, d: usize) -> UnitaryGate {
        let mut dims = vec![d];
        dims.extend_from_slice(&self.dims);
        Self {
            dims,
            matrix: ComplexMatrix::identity(d).kron(&self.matrix),
        }
    }
}

/// Where the cloning unitary sends each basis pair `|i⟩|j⟩`.
///
/// Pairs with `j = 0` must go to `|i⟩|i⟩`; every other pair must land on
/// some `|k⟩|l⟩` with `k ≠ l`, and the whole table must be a permutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CloningAssignment {
    d: usize,
    targets: Vec<(usize, usize)>,
}

impl CloningAssignment {
    /// `targets[i * d + j]` is the image of `|i⟩|j⟩`.
    pub fn new(d: usize, targets: Vec<(usize, usize)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidAssignment("dimension must be positive".into()));
        }
        if targets.len() != d * d {
            return Err(Error::InvalidAssignment(format!(
                "expected {} targets, got {}",
                d * d,
                targets.len()
            )));
        }
        let mut seen = vec![false; d * d];
        for (idx, &(k, l)) in targets.iter().enumerate() {
            let (i, j) = (idx / d, idx % d);
            if k >= d || l >= d {
                return Err(Error::InvalidAssignment(format!("target ({k}, {l}) out of range")));
            }
            if j == 0 && (k, l) != (i, i) {
                return Err(Error::InvalidAssignment(format!(
                    "|{i}⟩|0⟩ must map to |{i}⟩|{i}⟩, got |{k}⟩|{l}⟩"
                )));
            }
            if j != 0 && k == l {
                return Err(Error::InvalidAssignment(format!(
                    "|{i}⟩|{j}⟩ maps onto the cloned state |{k}⟩|{k}⟩"
                )));
            }
            if std::mem::replace(&mut seen[k * d + l], true) {
                return Err(Error::InvalidAssignment(format!("target |{k}⟩|{l}⟩ used twice")));
            }
        }
        Ok(Self { d, targets })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn target(&self, i: usize, j: usize) -> (usize, usize) {
        self.targets[i * self.d + j]
    }
}

/// Cyclic rule `|i⟩|j⟩ → |i⟩|(i + j) mod d⟩`. For `d = 2` this is a CNOT
/// controlled by the object.
pub fn default_assignment(d: usize) -> CloningAssignment {
    let targets = (0..d * d).map(|idx| (idx / d, (idx / d + idx % d) % d)).collect();
    CloningAssignment::new(d, targets).expect("cyclic assignment is valid")
}

/// Permutation unitary on A ⊗ B realizing the assignment.
pub fn cloning_unitary(assignment: &CloningAssignment) -> UnitaryGate {
    let d = assignment.d;
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let (k, l) = assignment.target(i, j);
            m[(k * d + l, i * d + j)] = ONE;
        }
    }
    UnitaryGate { dims: vec![d, d], matrix: m }
}

/// Unitary on D with first column `v`.
///
/// Remaining columns come from modified Gram–Schmidt over the computational
/// basis in index order, skipping candidates that lie within `TOL_EIG` of the
/// span so far. The last column is then rephased so the determinant is 1;
/// for `v = (q, √(1 − |q|²))` this yields the second column
/// `(−√(1 − |q|²), q*)`.
pub fn complete_to_unitary(v: &[Complex64]) -> ComplexMatrix {
    let n = v.len();
    let mut cols: Vec<Vec<Complex64>> = vec![v.to_vec()];
    for e in 0..n {
        if cols.len() == n {
            break;
        }
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        w[e] = ONE;
        // Two passes keep the result orthogonal when the residual is small.
        for _ in 0..2 {
            for c in &cols {
                let overlap: Complex64 = c.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (wi, ci) in w.iter_mut().zip(c) {
                    *wi -= overlap * ci;
                }
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= TOL_EIG {
            continue;
        }
        cols.push(w.into_iter().map(|z| z / norm).collect());
    }
    assert_eq!(cols.len(), n, "completion ran out of basis vectors");

    let mut m = ComplexMatrix::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        for (i, &z) in c.iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    if n >= 2 {
        let det = m.to_faer().determinant();
        let phase = det.conj() / det.norm();
        for i in 0..n {
            m[(i, n - 1)] *= phase;
        }
    }
    m
}

fn microstate_rotations(microstates: &[StateVector]) -> Result<Vec<ComplexMatrix>> {
    let d_d = microstates
        .first()
        .ok_or_else(|| Error::InvalidArgument("no microstates given".into()))?
        .dim();
    if microstates.iter().any(|v| v.dim() != d_d) {
        return Err(Error::DimensionMismatch("microstates differ in dimension".into()));
    }
    Ok(microstates.iter().map(|v| complete_to_unitary(v.amplitudes())).collect())
}

/// Partial-entanglement unitary on B ⊗ D: `|i⟩||0⟩⟩ → |i⟩||i⟩⟩`.
///
/// Built block-diagonally as `Σ_i |i⟩⟨i| ⊗ V_i` with `V_i` the completion of
/// the microstate `||i⟩⟩` from [`complete_to_unitary`].
pub fn entangling_unitary(microstates: &[StateVector], d_b: usize) -> Result<UnitaryGate> {
    if microstates.len() != d_b {
        return Err(Error::DimensionMismatch(format!(
            "need {d_b} microstates, got {}",
            microstates.len()
        )));
    }
    let rotations = microstate_rotations(microstates)?;
    let d_d = rotations[0].rows();
    let mut m = ComplexMatrix::zeros(d_b * d_d, d_b * d_d);
    for (i, v) in rotations.iter().enumerate() {
        m = &m + &ComplexMatrix::unit(d_b, i, i).kron(v);
    }
    UnitaryGate::new(vec![d_b, d_d], m)
}

/// Three-system unitary on A ⊗ B ⊗ D realizing the entangling measurement
/// with matrix `r` from the initial state `|0⟩||0⟩⟩` of B and D.
///
/// The cloning permutation acts first; the microstate rotation `V_i` is then
/// applied to D only on the cloned states `|i⟩|i⟩`, leaving the other
/// branches untouched. For two levels and `r = EntanglementMatrix::from_overlap(q)`
/// the matrix is exactly
///
/// ```text
/// 1 0 0 0 0 0 0 0
/// 0 1 0 0 0 0 0 0
/// 0 0 1 0 0 0 0 0
/// 0 0 0 1 0 0 0 0
/// 0 0 0 0 0 0 1 0
/// 0 0 0 0 0 0 0 1
/// 0 0 0 0 q −s 0 0
/// 0 0 0 0 s q* 0 0      s = √(1 − |q|²)
/// ```
pub fn combined_unitary(r: &EntanglementMatrix, assignment: &CloningAssignment) -> Result<UnitaryGate> {
    let d = r.d();
    if assignment.d() != d {
        return Err(Error::DimensionMismatch(format!(
            "assignment has dimension {}, entanglement matrix {d}",
            assignment.d()
        )));
    }
    let rotations = microstate_rotations(&r.microstates()?)?;
    let d_d = rotations[0].rows();
    let mut entangler = ComplexMatrix::zeros(d * d * d_d, d * d * d_d);
    for a in 0..d {
        for b in 0..d {
            let block = if a == b {
                rotations[a].clone()
            } else {
                ComplexMatrix::identity(d_d)
            };
            entangler = &entangler + &ComplexMatrix::unit(d * d, a * d + b, a * d + b).kron(&block);
        }
    }
    let clone = cloning_unitary(assignment).then_identity(d_d);
    UnitaryGate::new(vec![d, d, d_d], &entangler * clone.matrix())
}

/// The literal two-step composition `(I_A ⊗ U_E)(U_C ⊗ I_D)`.
///
/// Agrees with [`combined_unitary`] on every state reachable from the
/// initial apparatus state; the two differ only on the inactive subspace.
pub fn composed_unitary(r: &EntanglementMatrix, assignment: &CloningAssignment) -> Result<UnitaryGate> {
    let d = r.d();
    if assignment.d() != d {
        return Err(Error::DimensionMismatch("assignment and entanglement matrix differ in dimension".into()));
    }
    let u_e = entangling_unitary(&r.microstates()?, d)?.after_identity(d);
    let d_d = u_e.dims()[2];
    u_e.after(&cloning_unitary(assignment).then_identity(d_d))
}

/// Apparatus and internal ground state `|0⟩||0⟩⟩`.
pub fn initial_state(d_b: usize, d_d: usize) -> StateVector {
    StateVector::basis(&[d_b, d_d], 0)
}

/// Extended superoperator `U(⊙ ⊗ |φ⟩⟨φ|)U†`, with `φ` covering every
/// subsystem of `u` but the first.
pub fn realize_extended(u: &UnitaryGate, fixed_state: &StateVector) -> Result<ExtendedSuperoperator> {
    if u.dims().len() < 2 || fixed_state.dims() != &u.dims()[1..] {
        return Err(Error::DimensionMismatch(format!(
            "fixed state layout {:?} does not match gate layout {:?}",
            fixed_state.dims(),
            u.dims()
        )));
    }
    Ok(psi_from_unitary(u.matrix(), fixed_state)?.to_extended())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub pass: bool,
    pub max_dev: f64,
}

/// Named pass/fail checks with their worst deviations.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DilationReport {
    pub checks: BTreeMap<String, CheckResult>,
}

impl DilationReport {
    fn record(&mut self, name: &str, max_dev: f64, tol: f64) {
        self.checks.insert(
            name.to_owned(),
            CheckResult {
                pass: max_dev <= tol,
                max_dev,
            },
        );
    }

    pub fn all_pass(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }

    pub fn max_dev(&self) -> f64 {
        self.checks.values().map(|c| c.max_dev).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|(_, c)| !c.pass)
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

/// Checks that the unitary realization reproduces the abstract entangling
/// measurement for `r`, with tolerance [`TOL_EIG`].
pub fn verify_dilation(r: &EntanglementMatrix) -> DilationReport {
    verify_dilation_with_tol(r, TOL_EIG)
}

pub fn verify_dilation_with_tol(r: &EntanglementMatrix, tol: f64) -> DilationReport {
    let mut report = DilationReport::default();
    let d = r.d();
    let assignment = default_assignment(d);

    let u_c = cloning_unitary(&assignment);
    report.record("unitary_c", u_c.unitarity_error(), tol);

    let micro = match r.microstates() {
        Ok(m) => m,
        Err(_) => {
            report.record("microstates", f64::INFINITY, tol);
            return report;
        }
    };
    match entangling_unitary(&micro, d) {
        Ok(u_e) => report.record("unitary_e", u_e.unitarity_error(), tol),
        Err(_) => report.record("unitary_e", f64::INFINITY, tol),
    }

    let u_cd = match combined_unitary(r, &assignment) {
        Ok(u) => u,
        Err(_) => {
            report.record("unitary_cd", f64::INFINITY, tol);
            return report;
        }
    };
    report.record("unitary_cd", u_cd.unitarity_error(), tol);

    let d_d = u_cd.dims()[2];
    let realized = match realize_extended(&u_cd, &initial_state(d, d_d)) {
        Ok(e) => e,
        Err(_) => {
            report.record("realized_vs_abd", f64::INFINITY, tol);
            return report;
        }
    };
    let abd_dev = extended_entangling_abd(r)
        .map(|abd| realized.max_deviation(&abd))
        .unwrap_or(f64::INFINITY);
    report.record("realized_vs_abd", abd_dev, tol);

    let d_trace_dev = realized
        .trace_out(&[0, 1])
        .map(|ab| ab.max_deviation(&extended_entangling(r)))
        .unwrap_or(f64::INFINITY);
    report.record("d_trace_vs_entangling", d_trace_dev, tol);

    let bd_dev = realized
        .restrict_to_object()
        .map(|s| s.map_matrix().max_abs_diff(projective(d).map_matrix()))
        .unwrap_or(f64::INFINITY);
    report.record("bd_trace_vs_projective", bd_dev, tol);

    let composed_dev = composed_unitary(r, &assignment)
        .and_then(|u| realize_extended(&u, &initial_state(d, d_d)))
        .map(|e| e.max_deviation(&realized))
        .unwrap_or(f64::INFINITY);
    report.record("composition_agrees", composed_dev, tol);

    report
}
