//! Superoperators on a fixed space and the canonical measurement maps.
//!
//! A [`Superoperator`] is stored as the matrix acting on column-stacked
//! operators. The measured observable enters only through its eigenbasis,
//! which is taken to be the computational basis throughout.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::{gram_factor, hermitian_eig, ComplexMatrix, DensityMatrix, StateVector, TOL_EIG, TOL_HERM, TOL_PSD};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Hermitian matrix with unit diagonal describing the phase coherence kept
/// between measurement branches.
///
/// [`EntanglementMatrix::new`] also enforces positivity. Non-positive
/// instances can be built with [`EntanglementMatrix::hermitian_unit_diagonal`]
/// to exercise the complete-positivity tests.
#[derive(Clone, Debug, PartialEq)]
pub struct EntanglementMatrix {
    r: ComplexMatrix,
}

impl EntanglementMatrix {
    pub fn new(r: ComplexMatrix) -> Result<Self> {
        let em = Self::hermitian_unit_diagonal(r)?;
        let min = hermitian_eig(&em.r)?.min();
        if min < -TOL_PSD {
            return Err(Error::NotPositive(min));
        }
        Ok(em)
    }

    /// Validates Hermiticity and the unit diagonal but not positivity.
    pub fn hermitian_unit_diagonal(mut r: ComplexMatrix) -> Result<Self> {
        if !r.is_square() {
            return Err(Error::DimensionMismatch("entanglement matrix must be square".into()));
        }
        let herm = r.hermiticity_error();
        if herm > TOL_HERM {
            return Err(Error::NotHermitian(herm));
        }
        for i in 0..r.rows() {
            let z = r[(i, i)];
            if (z - ONE).norm() > TOL_HERM {
                return Err(Error::BadDiagonal {
                    index: i,
                    value: format!("{z}"),
                });
            }
            r[(i, i)] = ONE;
        }
        Ok(Self { r })
    }

    /// Two-level matrix `[[1, q], [q*, 1]]`.
    pub fn qubit(q: Complex64) -> Result<Self> {
        Self::new(ComplexMatrix::from_rows(vec![vec![ONE, q], vec![q.conj(), ONE]]))
    }

    /// Two-level matrix realized by the three-qubit model whose second
    /// microstate is `(q, √(1 − |q|²))`, i.e. `⟨⟨1|2⟩⟩ = q`.
    ///
    /// The dephasing it produces multiplies `ρ₁₂` by `q*`, so this is
    /// `qubit(q.conj())`.
    pub fn from_overlap(q: Complex64) -> Result<Self> {
        Self::qubit(q.conj())
    }

    /// `R = I`: projective measurement.
    pub fn identity(d: usize) -> Self {
        Self {
            r: ComplexMatrix::identity(d),
        }
    }

    /// `R_ij = 1`: fully coherent cloning.
    pub fn all_ones(d: usize) -> Self {
        Self {
            r: ComplexMatrix::new(d, d, vec![ONE; d * d]).expect("positive dimension"),
        }
    }

    pub fn d(&self) -> usize {
        self.r.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.r
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        hermitian_eig(&self.r).map(|e| e.min() >= -tol).unwrap_or(false)
    }

    /// Unit vectors with `⟨v_i|v_j⟩ = R_ij`.
    pub fn gram_vectors(&self) -> Result<Vec<StateVector>> {
        gram_factor(&self.r)
    }

    /// Internal apparatus states `||k⟩⟩` for this matrix.
    ///
    /// Tracing `|k⟩⟨l| ⊗ ||k⟩⟩⟨⟨l||` over the internal space leaves
    /// `⟨⟨l||k⟩⟩`, which must equal `R_kl`; the microstates therefore have
    /// Gram matrix `Rᵀ`.
    pub fn microstates(&self) -> Result<Vec<StateVector>> {
        gram_factor(&self.r.transpose())
    }
}

/// Set of measurement operators `F_k` with `Σ F_k† F_k = I`.
#[derive(Clone, Debug)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty measurement operator set".into()))?;
        let (rows, cols) = (first.rows(), first.cols());
        if operators.iter().any(|f| f.rows() != rows || f.cols() != cols) {
            return Err(Error::DimensionMismatch("measurement operators differ in shape".into()));
        }
        let set = Self { operators };
        let dev = set.completeness_error();
        if dev > TOL_EIG {
            return Err(Error::Incomplete(dev));
        }
        Ok(set)
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// Effects `E_k = F_k† F_k`.
    pub fn effects(&self) -> Vec<ComplexMatrix> {
        self.operators.iter().map(|f| &f.adjoint() * f).collect()
    }

    /// `max |Σ F_k† F_k − I|`.
    pub fn completeness_error(&self) -> f64 {
        let n = self.operators[0].cols();
        let sum = self
            .effects()
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, e| &acc + e);
        sum.max_abs_diff(&ComplexMatrix::identity(n))
    }

    /// Outcome probabilities `Tr(E_k ρ)`.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        self.effects()
            .iter()
            .map(|e| {
                if e.cols() != rho.dim() {
                    return Err(Error::DimensionMismatch(format!(
                        "effect acts on dimension {}, state has {}",
                        e.cols(),
                        rho.dim()
                    )));
                }
                Ok((e * rho.matrix()).trace().re)
            })
            .collect()
    }

    /// `Σ_k F_k ⊙ F_k†`.
    pub fn to_superop(&self) -> Superoperator {
        let (rows, cols) = (self.operators[0].rows(), self.operators[0].cols());
        let map = self
            .operators
            .iter()
            .map(|f| f.conj().kron(f))
            .fold(ComplexMatrix::zeros(rows * rows, cols * cols), |acc, m| &acc + &m);
        Superoperator {
            dims_in: vec![cols],
            dims_out: vec![rows],
            map,
        }
    }
}

/// Linear map on operators, stored as a `d_out² × d_in²` matrix on
/// column-stacked operators.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dims_in: Vec<usize>,
    dims_out: Vec<usize>,
    map: ComplexMatrix,
}

impl Superoperator {
    pub fn from_map_matrix(dims_in: Vec<usize>, dims_out: Vec<usize>, map: ComplexMatrix) -> Result<Self> {
        let din: usize = dims_in.iter().product();
        let dout: usize = dims_out.iter().product();
        if dims_in.is_empty() || dims_out.is_empty() || map.rows() != dout * dout || map.cols() != din * din {
            return Err(Error::DimensionMismatch(format!(
                "map matrix is {}x{}, expected {}x{}",
                map.rows(),
                map.cols(),
                dout * dout,
                din * din
            )));
        }
        Ok(Self { dims_in, dims_out, map })
    }

    /// Builds the map from its action on the matrix units `|k⟩⟨l|`.
    pub fn from_images(
        dims_in: Vec<usize>,
        dims_out: Vec<usize>,
        mut image: impl FnMut(usize, usize) -> ComplexMatrix,
    ) -> Self {
        let din: usize = dims_in.iter().product();
        let dout: usize = dims_out.iter().product();
        let mut map = ComplexMatrix::zeros(dout * dout, din * din);
        for l in 0..din {
            for k in 0..din {
                let img = image(k, l);
                assert_eq!((img.rows(), img.cols()), (dout, dout), "image has wrong shape");
                let col = k + l * din;
                for (row, z) in img.vectorize().into_iter().enumerate() {
                    map[(row, col)] = z;
                }
            }
        }
        Self { dims_in, dims_out, map }
    }

    /// `U ⊙ U†` on the product space `dims`.
    pub fn unitary(u: &ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        Self::from_map_matrix(dims.clone(), dims, u.conj().kron(u))
    }

    pub fn dim_in(&self) -> usize {
        self.dims_in.iter().product()
    }

    pub fn dim_out(&self) -> usize {
        self.dims_out.iter().product()
    }

    pub fn dims_in(&self) -> &[usize] {
        &self.dims_in
    }

    pub fn dims_out(&self) -> &[usize] {
        &self.dims_out
    }

    pub fn map_matrix(&self) -> &ComplexMatrix {
        &self.map
    }

    /// Image of the matrix unit `|k⟩⟨l|`.
    pub fn image(&self, k: usize, l: usize) -> ComplexMatrix {
        let (din, dout) = (self.dim_in(), self.dim_out());
        ComplexMatrix::from_vectorized(dout, dout, &self.map.column(k + l * din))
    }

    /// Applies the map to an arbitrary operator.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let din = self.dim_in();
        if x.rows() != din || x.cols() != din {
            return Err(Error::DimensionMismatch(format!(
                "superoperator acts on {din}x{din} operators, got {}x{}",
                x.rows(),
                x.cols()
            )));
        }
        let dout = self.dim_out();
        Ok(ComplexMatrix::from_vectorized(dout, dout, &self.map.mul_vec(&x.vectorize())))
    }

    /// Applies the map to a state. The output must itself be a valid density
    /// matrix; a failure here means the map is not physical.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_operator(rho.matrix())?;
        DensityMatrix::new(out, self.dims_out.clone())
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &Superoperator) -> Result<Superoperator> {
        if first.dim_out() != self.dim_in() {
            return Err(Error::DimensionMismatch("composed superoperators do not chain".into()));
        }
        Ok(Self {
            dims_in: first.dims_in.clone(),
            dims_out: self.dims_out.clone(),
            map: &self.map * &first.map,
        })
    }

    /// Choi matrix `Σ_kl S(|k⟩⟨l|) ⊗ |k⟩⟨l|` on output ⊗ input.
    pub fn choi(&self) -> ComplexMatrix {
        let din = self.dim_in();
        let dout = self.dim_out();
        let mut c = ComplexMatrix::zeros(dout * din, dout * din);
        for k in 0..din {
            for l in 0..din {
                let img = self.image(k, l);
                for i in 0..dout {
                    for j in 0..dout {
                        c[(i * din + k, j * din + l)] = img[(i, j)];
                    }
                }
            }
        }
        c
    }

    pub fn is_completely_positive(&self, tol: f64) -> bool {
        hermitian_eig(&self.choi()).map(|e| e.min() >= -tol).unwrap_or(false)
    }

    /// `Tr S(|k⟩⟨l|) = δ_kl` for every matrix unit.
    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        let din = self.dim_in();
        (0..din).all(|k| {
            (0..din).all(|l| {
                let expected = if k == l { ONE } else { ZERO };
                (self.image(k, l).trace() - expected).norm() <= tol
            })
        })
    }
}

pub fn apply(s: &Superoperator, rho: &DensityMatrix) -> Result<DensityMatrix> {
    s.apply(rho)
}

pub fn choi(s: &Superoperator) -> ComplexMatrix {
    s.choi()
}

pub fn is_completely_positive(s: &Superoperator, tol: f64) -> bool {
    s.is_completely_positive(tol)
}

pub fn is_trace_preserving(s: &Superoperator, tol: f64) -> bool {
    s.is_trace_preserving(tol)
}

pub fn identity_superop(d: usize) -> Superoperator {
    Superoperator {
        dims_in: vec![d],
        dims_out: vec![d],
        map: ComplexMatrix::identity(d * d),
    }
}

/// `Σ_k |k⟩⟨k| ⊙ |k⟩⟨k|`: removes every off-diagonal element.
pub fn projective(d: usize) -> Superoperator {
    Superoperator::from_images(vec![d], vec![d], |k, l| {
        if k == l {
            ComplexMatrix::unit(d, k, k)
        } else {
            ComplexMatrix::zeros(d, d)
        }
    })
}

/// Orthogonal projectors `F_k = |k⟩⟨k|`.
pub fn psm_projectors(d: usize) -> KrausSet {
    KrausSet::new((0..d).map(|k| ComplexMatrix::unit(d, k, k)).collect()).expect("projectors are complete")
}

/// `Σ_ij R_ij |i⟩⟨i| ⊙ |j⟩⟨j|`: `ρ_ij → R_ij ρ_ij`.
pub fn dephasing(r: &EntanglementMatrix) -> Superoperator {
    let d = r.d();
    let mut map = ComplexMatrix::zeros(d * d, d * d);
    for j in 0..d {
        for i in 0..d {
            map[(i + j * d, i + j * d)] = r.matrix()[(i, j)];
        }
    }
    Superoperator {
        dims_in: vec![d],
        dims_out: vec![d],
        map,
    }
}

/// Entangling measurement on object ⊗ apparatus:
/// `σ ↦ Σ_ij R_ij (Σ_m ⟨i,m|σ|j,m⟩) |ii⟩⟨jj|`.
///
/// The output ignores the apparatus input entirely.
pub fn entangling_measurement(r: &EntanglementMatrix) -> Superoperator {
    let d = r.d();
    Superoperator::from_images(vec![d, d], vec![d, d], |row, col| {
        let (a, b) = (row / d, row % d);
        let (c, e) = (col / d, col % d);
        let mut img = ComplexMatrix::zeros(d * d, d * d);
        if b == e {
            img[(a * d + a, c * d + c)] = r.matrix()[(a, c)];
        }
        img
    })
}

/// Basis cloning `|j⟩|m⟩ ↦ |j⟩|j⟩`, the fully coherent entangling measurement.
pub fn cloning_superop(d: usize) -> Superoperator {
    entangling_measurement(&EntanglementMatrix::all_ones(d))
}

/// Resets subsystem B to `state` and leaves A alone: `I_A ⊗ |ψ⟩⟨ψ| Tr_B`.
pub fn reset_apparatus(d_a: usize, state: &DensityMatrix) -> Superoperator {
    let d_b = state.dim();
    Superoperator::from_images(vec![d_a, d_b], vec![d_a, d_b], |row, col| {
        let (a, b) = (row / d_b, row % d_b);
        let (c, e) = (col / d_b, col % d_b);
        if b == e {
            ComplexMatrix::unit(d_a, a, c).kron(state.matrix())
        } else {
            ComplexMatrix::zeros(d_a * d_b, d_a * d_b)
        }
    })
}
