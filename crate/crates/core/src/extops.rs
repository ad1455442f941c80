//! Extended superoperators: maps from operators on the object space to
//! operators on object ⊗ apparatus (⊗ internal) space.
//!
//! The primary representation is the set of basis images
//! `Ê_kl = E(|k⟩⟨l|)`; the rectangular matrix is a derived view.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::{hermitian_eig, partial_trace, ComplexMatrix, DensityMatrix, StateVector, TOL_EIG};
use crate::superop::{EntanglementMatrix, Superoperator};

#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedSuperoperator {
    d_a: usize,
    dims_out: Vec<usize>,
    /// Indexed `k * d_a + l`.
    images: Vec<ComplexMatrix>,
}

impl ExtendedSuperoperator {
    /// Builds an extension from explicit images, checked for shape and for
    /// the pairing `Ê_lk = Ê_kl†`.
    pub fn new(d_a: usize, dims_out: Vec<usize>, images: Vec<ComplexMatrix>) -> Result<Self> {
        if d_a == 0 || dims_out.is_empty() || dims_out.contains(&0) {
            return Err(Error::DimensionMismatch("extended superoperator dimensions must be positive".into()));
        }
        if images.len() != d_a * d_a {
            return Err(Error::DimensionMismatch(format!(
                "expected {} images, got {}",
                d_a * d_a,
                images.len()
            )));
        }
        let n: usize = dims_out.iter().product();
        if let Some(bad) = images.iter().position(|m| m.rows() != n || m.cols() != n) {
            return Err(Error::DimensionMismatch(format!("image {bad} is not {n}x{n}")));
        }
        let e = Self { d_a, dims_out, images };
        for k in 0..d_a {
            for l in k..d_a {
                let dev = e.image(l, k).max_abs_diff(&e.image(k, l).adjoint());
                if dev > TOL_EIG {
                    return Err(Error::NotHermitian(dev));
                }
            }
        }
        Ok(e)
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn dims_out(&self) -> &[usize] {
        &self.dims_out
    }

    pub fn dim_out(&self) -> usize {
        self.dims_out.iter().product()
    }

    /// `Ê_kl = E(|k⟩⟨l|)`.
    pub fn image(&self, k: usize, l: usize) -> &ComplexMatrix {
        &self.images[k * self.d_a + l]
    }

    pub fn images(&self) -> &[ComplexMatrix] {
        &self.images
    }

    /// `Σ_kl ⟨k|ρ|l⟩ Ê_kl` on an arbitrary operator.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.d_a || x.cols() != self.d_a {
            return Err(Error::DimensionMismatch(format!(
                "extension acts on {0}x{0} operators, got {1}x{2}",
                self.d_a,
                x.rows(),
                x.cols()
            )));
        }
        let n = self.dim_out();
        let mut out = ComplexMatrix::zeros(n, n);
        for k in 0..self.d_a {
            for l in 0..self.d_a {
                let w = x[(k, l)];
                if w != Complex64::new(0.0, 0.0) {
                    out = &out + &self.image(k, l).scale(w);
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, rho_a: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_operator(rho_a.matrix())?;
        DensityMatrix::new(out, self.dims_out.clone())
    }

    /// Ordinary superoperator from A to the kept output subsystems, obtained by
    /// tracing every image over the rest.
    pub fn restrict(&self, keep: &[usize]) -> Result<Superoperator> {
        let traced: Vec<ComplexMatrix> = self
            .images
            .iter()
            .map(|m| partial_trace(m, &self.dims_out, keep))
            .collect::<Result<_>>()?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let dims: Vec<usize> = keep.iter().map(|&s| self.dims_out[s]).collect();
        let d_a = self.d_a;
        Ok(Superoperator::from_images(vec![d_a], dims, |k, l| traced[k * d_a + l].clone()))
    }

    /// Restriction onto the object (first output subsystem).
    pub fn restrict_to_object(&self) -> Result<Superoperator> {
        self.restrict(&[0])
    }

    /// Same images, each traced over everything outside `keep`.
    pub fn trace_out(&self, keep: &[usize]) -> Result<ExtendedSuperoperator> {
        let images = self
            .images
            .iter()
            .map(|m| partial_trace(m, &self.dims_out, keep))
            .collect::<Result<_>>()?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        Ok(Self {
            d_a: self.d_a,
            dims_out: keep.iter().map(|&s| self.dims_out[s]).collect(),
            images,
        })
    }

    /// `N² × d_a²` matrix whose column `k + l·d_a` is `vec(Ê_kl)`, with `N`
    /// the output dimension.
    pub fn rect_matrix(&self) -> ComplexMatrix {
        let n = self.dim_out();
        let mut m = ComplexMatrix::zeros(n * n, self.d_a * self.d_a);
        for l in 0..self.d_a {
            for k in 0..self.d_a {
                for (row, z) in self.image(k, l).vectorize().into_iter().enumerate() {
                    m[(row, k + l * self.d_a)] = z;
                }
            }
        }
        m
    }

    /// Inverse of [`ExtendedSuperoperator::rect_matrix`].
    pub fn from_rect_matrix(d_a: usize, dims_out: Vec<usize>, m: &ComplexMatrix) -> Result<Self> {
        let n: usize = dims_out.iter().product();
        if m.rows() != n * n || m.cols() != d_a * d_a {
            return Err(Error::DimensionMismatch(format!(
                "rectangular matrix is {}x{}, expected {}x{}",
                m.rows(),
                m.cols(),
                n * n,
                d_a * d_a
            )));
        }
        let mut images = Vec::with_capacity(d_a * d_a);
        for k in 0..d_a {
            for l in 0..d_a {
                images.push(ComplexMatrix::from_vectorized(n, n, &m.column(k + l * d_a)));
            }
        }
        Self::new(d_a, dims_out, images)
    }

    /// Positivity witness `Σ_kl Ê_kl ⊗ |k⟩⟨l|` on output ⊗ A.
    pub fn choi(&self) -> ComplexMatrix {
        let mut c = ComplexMatrix::zeros(self.dim_out() * self.d_a, self.dim_out() * self.d_a);
        for k in 0..self.d_a {
            for l in 0..self.d_a {
                c = &c + &self.image(k, l).kron(&ComplexMatrix::unit(self.d_a, k, l));
            }
        }
        c
    }

    pub fn is_completely_positive(&self, tol: f64) -> bool {
        hermitian_eig(&self.choi()).map(|e| e.min() >= -tol).unwrap_or(false)
    }

    /// `Tr Ê_kl = δ_kl`.
    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        (0..self.d_a).all(|k| {
            (0..self.d_a).all(|l| {
                let expected = if k == l { 1.0 } else { 0.0 };
                (self.image(k, l).trace() - Complex64::new(expected, 0.0)).norm() <= tol
            })
        })
    }

    /// Largest entrywise difference over all images.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        assert_eq!(self.d_a, other.d_a, "input dimensions differ");
        assert_eq!(self.dims_out, other.dims_out, "output layouts differ");
        self.images
            .iter()
            .zip(&other.images)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

/// `E = S(⊙ ⊗ ρ_B⁰)`: fixes the apparatus input of a map on A ⊗ B.
pub fn extend(s: &Superoperator, rho_b0: &DensityMatrix) -> Result<ExtendedSuperoperator> {
    let d_b = rho_b0.dim();
    if s.dim_in() % d_b != 0 {
        return Err(Error::DimensionMismatch(format!(
            "superoperator input dimension {} is not a multiple of {d_b}",
            s.dim_in()
        )));
    }
    let d_a = s.dim_in() / d_b;
    let mut images = Vec::with_capacity(d_a * d_a);
    for k in 0..d_a {
        for l in 0..d_a {
            images.push(s.apply_operator(&ComplexMatrix::unit(d_a, k, l).kron(rho_b0.matrix()))?);
        }
    }
    Ok(ExtendedSuperoperator {
        d_a,
        dims_out: s.dims_out().to_vec(),
        images,
    })
}

/// `Ê_kl = R_kl |kk⟩⟨ll|` on A ⊗ B.
pub fn extended_entangling(r: &EntanglementMatrix) -> ExtendedSuperoperator {
    let d = r.d();
    let mut images = Vec::with_capacity(d * d);
    for k in 0..d {
        for l in 0..d {
            let mut m = ComplexMatrix::zeros(d * d, d * d);
            m[(k * d + k, l * d + l)] = r.matrix()[(k, l)];
            images.push(m);
        }
    }
    ExtendedSuperoperator {
        d_a: d,
        dims_out: vec![d, d],
        images,
    }
}

/// `Ê_kl = |k⟩|k⟩||k⟩⟩ ⟨⟨l||⟨l|⟨l|` on A ⊗ B ⊗ D, with the microstates of
/// [`EntanglementMatrix::microstates`]. Tracing out D gives
/// [`extended_entangling`].
pub fn extended_entangling_abd(r: &EntanglementMatrix) -> Result<ExtendedSuperoperator> {
    let d = r.d();
    let micro = r.microstates()?;
    let psi: Vec<StateVector> = (0..d)
        .map(|k| {
            let kk = StateVector::basis(&[d, d], k * d + k);
            kk.tensor(&micro[k])
        })
        .collect();
    Ok(PsiRepresentation::from_vectors(psi)?.to_extended())
}

pub fn apply_ext(e: &ExtendedSuperoperator, rho_a: &DensityMatrix) -> Result<DensityMatrix> {
    e.apply(rho_a)
}

/// Restricts to the object when `keep_a_only` is set; otherwise traces only the
/// last output subsystem.
pub fn restrict(e: &ExtendedSuperoperator, keep_a_only: bool) -> Result<Superoperator> {
    if keep_a_only {
        e.restrict_to_object()
    } else {
        let n = e.dims_out().len();
        if n < 2 {
            return Err(Error::InvalidSubsystems("nothing to trace besides the object".into()));
        }
        e.restrict(&(0..n - 1).collect::<Vec<_>>())
    }
}

pub fn rect_matrix(e: &ExtendedSuperoperator) -> ComplexMatrix {
    e.rect_matrix()
}

pub fn is_completely_positive_ext(e: &ExtendedSuperoperator, tol: f64) -> bool {
    e.is_completely_positive(tol)
}

/// Pure-state form of a unitary extension: `Ê_kl = Ψ_k Ψ_l†`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiRepresentation {
    psi: Vec<StateVector>,
}

impl PsiRepresentation {
    /// Requires an orthonormal family sharing one subsystem layout.
    pub fn from_vectors(psi: Vec<StateVector>) -> Result<Self> {
        let first = psi
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty Ψ family".into()))?;
        if psi.iter().any(|v| v.dims() != first.dims()) {
            return Err(Error::DimensionMismatch("Ψ vectors differ in layout".into()));
        }
        for (k, a) in psi.iter().enumerate() {
            for (l, b) in psi.iter().enumerate().skip(k + 1) {
                let overlap = a.inner(b).norm();
                if overlap > TOL_EIG {
                    return Err(Error::InvalidArgument(format!(
                        "Ψ_{k} and Ψ_{l} are not orthogonal (overlap {overlap:e})"
                    )));
                }
            }
        }
        Ok(Self { psi })
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.psi
    }

    /// The `d_a × N` matrix with rows `Ψ_k`.
    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_rows(self.psi.iter().map(|v| v.amplitudes().to_vec()).collect())
    }

    pub fn to_extended(&self) -> ExtendedSuperoperator {
        let d_a = self.psi.len();
        let mut images = Vec::with_capacity(d_a * d_a);
        for k in 0..d_a {
            for l in 0..d_a {
                images.push(ComplexMatrix::outer(self.psi[k].amplitudes(), self.psi[l].amplitudes()));
            }
        }
        ExtendedSuperoperator {
            d_a,
            dims_out: self.psi[0].dims().to_vec(),
            images,
        }
    }
}

/// `Ψ_k = U(|k⟩ ⊗ fixed_input)`. The object dimension is
/// `dim U / dim fixed_input`; the output layout is `[d_a] ++ fixed_input.dims()`.
pub fn psi_from_unitary(u: &ComplexMatrix, fixed_input: &StateVector) -> Result<PsiRepresentation> {
    let dev = u.unitarity_error();
    if dev > TOL_EIG {
        return Err(Error::NotUnitary(dev));
    }
    let rest = fixed_input.dim();
    if u.rows() % rest != 0 {
        return Err(Error::DimensionMismatch(format!(
            "unitary dimension {} is not a multiple of {rest}",
            u.rows()
        )));
    }
    let d_a = u.rows() / rest;
    let mut dims = vec![d_a];
    dims.extend_from_slice(fixed_input.dims());
    let psi = (0..d_a)
        .map(|k| {
            let input = StateVector::basis(&[d_a], k).tensor(fixed_input);
            StateVector::new(u.mul_vec(input.amplitudes()), dims.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    // Orthonormality follows from unitarity.
    Ok(PsiRepresentation { psi })
}
