use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::state::StateVector;
use super::{TOL_HERM, TOL_PSD};
use crate::error::{Error, Result};

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigen {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let lambda: Vec<_> = self.values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        &(&self.vectors * &ComplexMatrix::diag(&lambda)) * &self.vectors.adjoint()
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back in descending order. Each eigenvector is rotated so that
/// its largest-magnitude component (first one on ties) is real and positive.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<Eigen> {
    let herm = h.hermiticity_error();
    if herm > TOL_HERM {
        return Err(Error::NotHermitian(herm));
    }
    let n = h.rows();
    // Average with the adjoint so the solver sees an exactly Hermitian input.
    let sym = (h + &h.adjoint()).scale(Complex64::new(0.5, 0.0));
    let evd = sym
        .to_faer()
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::InvalidArgument(format!("eigendecomposition did not converge: {e:?}")))?;
    let (s, u) = (evd.S(), evd.U());
    if (0..n).any(|k| !s[k].re.is_finite()) {
        return Err(Error::InvalidArgument("eigendecomposition produced non-finite values".into()));
    }

    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    // faer sorts ascending.
    for (col, src) in (0..n).rev().enumerate() {
        values.push(s[src].re);
        let v: Vec<Complex64> = (0..n).map(|i| u[(i, src)]).collect();
        let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let pivot = v.iter().find(|z| z.norm() >= max - 1e-12).copied().unwrap_or(Complex64::new(1.0, 0.0));
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { Complex64::new(1.0, 0.0) };
        for (i, z) in v.into_iter().enumerate() {
            vectors[(i, col)] = z * phase;
        }
    }
    Ok(Eigen { values, vectors })
}

/// True iff the smallest eigenvalue of the Hermitian matrix `h` is at least `-tol`.
pub fn is_psd(h: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(hermitian_eig(h)?.min() >= -tol)
}

/// Factor a positive semidefinite, unit-diagonal matrix `r` into unit vectors
/// `v_1..v_d` with `⟨v_i|v_j⟩ = r[(i, j)]`.
///
/// The square root is taken spectrally, so rank-deficient `r` is fine. The
/// factor is then rotated into upper-triangular form with a real nonnegative
/// diagonal, which pins `v_1 = (1, 0, …)` and for `d = 2` gives
/// `v_2 = (r₁₂, √(1 − |r₁₂|²))`.
pub fn gram_factor(r: &ComplexMatrix) -> Result<Vec<StateVector>> {
    if !r.is_square() {
        return Err(Error::DimensionMismatch("Gram matrix must be square".into()));
    }
    for (i, z) in r.diagonal().iter().enumerate() {
        if (z - Complex64::new(1.0, 0.0)).norm() > TOL_HERM {
            return Err(Error::BadDiagonal {
                index: i,
                value: format!("{z}"),
            });
        }
    }
    let eig = hermitian_eig(r)?;
    if eig.min() < -TOL_PSD {
        return Err(Error::NotPositive(eig.min()));
    }
    let d = r.rows();

    // G₀ = Λ^{1/2} V†, so G₀†G₀ = r.
    let mut g0 = eig.vectors.adjoint();
    for k in 0..d {
        let s = eig.values[k].max(0.0).sqrt();
        for j in 0..d {
            g0[(k, j)] *= s;
        }
    }

    // G₀ = Q T with T upper triangular; T†T = r as well.
    let mut t = ComplexMatrix::from_faer(g0.to_faer().qr().R());
    for k in 0..d {
        let lead = (k..d).map(|j| t[(k, j)]).find(|z| z.norm() > 1e-12);
        if let Some(z) = lead {
            let phase = z.conj() / z.norm();
            for j in 0..d {
                t[(k, j)] *= phase;
            }
        }
    }

    (0..d)
        .map(|i| {
            let mut v = t.column(i);
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in &mut v {
                *z /= n;
            }
            StateVector::single(v)
        })
        .collect()
}
