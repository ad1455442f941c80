use num_complex::Complex64;

use super::linalg::hermitian_eig;
use super::matrix::ComplexMatrix;
use super::{TOL_HERM, TOL_PSD, TOL_TRACE};
use crate::error::{Error, Result};

/// Normalized pure state with a subsystem layout.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    dims: Vec<usize>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!("state vector norm is {norm}, expected 1")));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Single-system state of dimension `amplitudes.len()`.
    pub fn single(amplitudes: Vec<Complex64>) -> Result<Self> {
        let d = amplitudes.len();
        Self::new(amplitudes, vec![d])
    }

    /// Computational basis vector `|index⟩` on the product space described by `dims`.
    pub fn basis(dims: &[usize], index: usize) -> Self {
        let n: usize = dims.iter().product();
        assert!(index < n, "basis index {index} out of range for dimension {n}");
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self {
            amplitudes,
            dims: dims.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Tensor product; subsystem lists are concatenated.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { amplitudes, dims }
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn conj(&self) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|z| z.conj()).collect(),
            dims: self.dims.clone(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: self.projector(),
            dims: self.dims.clone(),
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace operator with a subsystem layout.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState(format!(
                "density matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        check_dims(&dims, matrix.rows())?;
        let herm = matrix.hermiticity_error();
        if herm > TOL_HERM {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = matrix.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TOL_TRACE {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min = hermitian_eig(&matrix)?.min();
        if min < -TOL_PSD {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { matrix, dims })
    }

    /// Single-system density matrix.
    pub fn single(matrix: ComplexMatrix) -> Result<Self> {
        let d = matrix.rows();
        Self::new(matrix, vec![d])
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(d).scale(Complex64::new(1.0 / d as f64, 0.0)),
            dims: vec![d],
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            matrix: self.matrix.kron(&other.matrix),
            dims,
        }
    }

    /// Populations in the computational basis.
    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eig(&self.matrix)
            .map(|e| e.values)
            .expect("density matrix is Hermitian by construction")
    }

    /// Reduced state on the subsystems in `keep`, listed in their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = normalize_keep(keep, self.dims.len())?;
        let matrix = trace_out(&self.matrix, &self.dims, &keep);
        let dims = keep.iter().map(|&k| self.dims[k]).collect();
        Ok(Self { matrix, dims })
    }
}

/// Partial trace of an arbitrary square operator on the product space `dims`,
/// keeping the subsystems listed in `keep`.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("partial trace needs a square operator".into()));
    }
    check_dims(dims, m.rows())?;
    let keep = normalize_keep(keep, dims.len())?;
    Ok(trace_out(m, dims, &keep))
}

fn normalize_keep(keep: &[usize], n: usize) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::InvalidSubsystems("keep set is empty".into()));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= n) {
        return Err(Error::InvalidSubsystems(format!(
            "subsystem index {bad} out of range for {n} subsystems"
        )));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    Ok(keep)
}

fn trace_out(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> ComplexMatrix {
    let n = m.rows();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let is_kept: Vec<bool> = (0..dims.len()).map(|s| keep.contains(&s)).collect();

    // Split each full index into (kept index, traced index).
    let split: Vec<(usize, usize)> = (0..n)
        .map(|idx| {
            let mut rem = idx;
            let (mut kept, mut kept_stride) = (0, 1);
            let (mut traced, mut traced_stride) = (0, 1);
            for s in (0..dims.len()).rev() {
                let digit = rem % dims[s];
                rem /= dims[s];
                if is_kept[s] {
                    kept += digit * kept_stride;
                    kept_stride *= dims[s];
                } else {
                    traced += digit * traced_stride;
                    traced_stride *= dims[s];
                }
            }
            (kept, traced)
        })
        .collect();

    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for i in 0..n {
        let (ki, ti) = split[i];
        for j in 0..n {
            let (kj, tj) = split[j];
            if ti == tj {
                out[(ki, kj)] += m[(i, j)];
            }
        }
    }
    out
}

fn check_dims(dims: &[usize], n: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DimensionMismatch(format!("invalid subsystem dimensions {dims:?}")));
    }
    let prod: usize = dims.iter().product();
    if prod != n {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dimensions {dims:?} multiply to {prod}, operator dimension is {n}"
        )));
    }
    Ok(())
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::single(vec![c(h, 0.0), c(h, 0.0)]).unwrap()
    }

    #[test]
    fn product_state_traces_to_factor() {
        let a = DensityMatrix::single(ComplexMatrix::from_rows(vec![
            vec![c(0.7, 0.0), c(0.1, 0.2)],
            vec![c(0.1, -0.2), c(0.3, 0.0)],
        ]))
        .unwrap();
        let b = DensityMatrix::single(ComplexMatrix::diag_real(&[0.2, 0.5, 0.3])).unwrap();
        let ab = a.tensor(&b);
        assert!(ab.partial_trace(&[0]).unwrap().matrix().max_abs_diff(a.matrix()) < 1e-15);
        assert!(ab.partial_trace(&[1]).unwrap().matrix().max_abs_diff(b.matrix()) < 1e-15);
    }

    #[test]
    fn bell_state_marginal_is_maximally_mixed() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = StateVector::new(vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)], vec![2, 2])
            .unwrap()
            .to_density();
        let rb = phi.partial_trace(&[1]).unwrap();
        assert!(rb.matrix().max_abs_diff(DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
    }

    #[test]
    fn cloned_coherences_vanish_under_trace() {
        // Σ R_ij ρ_ij |ii⟩⟨jj| traced over B leaves Σ ρ_ii |i⟩⟨i|.
        let rho = [[c(0.6, 0.0), c(0.2, 0.3)], [c(0.2, -0.3), c(0.4, 0.0)]];
        let r = [[c(1.0, 0.0), c(0.3, 0.4)], [c(0.3, -0.4), c(1.0, 0.0)]];
        let mut m = ComplexMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                m[(3 * i, 3 * j)] = r[i][j] * rho[i][j];
            }
        }
        let out = partial_trace(&m, &[2, 2], &[0]).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::diag_real(&[0.6, 0.4])) < 1e-15);
    }

    #[test]
    fn keep_set_errors() {
        let rho = DensityMatrix::maximally_mixed(2).tensor(&DensityMatrix::maximally_mixed(2));
        assert!(matches!(rho.partial_trace(&[]), Err(Error::InvalidSubsystems(_))));
        assert!(matches!(rho.partial_trace(&[2]), Err(Error::InvalidSubsystems(_))));
    }

    #[test]
    fn keeping_everything_is_identity_and_order_is_canonical() {
        let rho = plus().to_density().tensor(&DensityMatrix::maximally_mixed(3));
        let same = rho.partial_trace(&[1, 0]).unwrap();
        assert_eq!(same.dims(), &[2, 3]);
        assert!(same.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::single(ComplexMatrix::diag_real(&[0.5, 0.6])).is_err());
        assert!(DensityMatrix::single(ComplexMatrix::diag_real(&[1.2, -0.2])).is_err());
        assert!(DensityMatrix::single(ComplexMatrix::from_real(2, 2, &[0.5, 0.1, 0.0, 0.5])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::identity(4).scale(c(0.25, 0.0)), vec![2, 3]).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::identity(4).scale(c(0.25, 0.0)), vec![2, 2]).is_ok());
    }

    #[test]
    fn state_vector_norm_checked() {
        assert!(StateVector::single(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        let p = plus();
        assert!((p.inner(&p) - c(1.0, 0.0)).norm() < 1e-15);
        let pp = p.tensor(&StateVector::basis(&[3], 2));
        assert_eq!(pp.dims(), &[2, 3]);
        assert_eq!(pp.dim(), 6);
    }
}
