//! Seeded random states and entanglement matrices for property checks.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::qmat::{hermitian_eig, ComplexMatrix, DensityMatrix, StateVector};
use crate::superop::EntanglementMatrix;

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unit vector.
pub fn unit_vector(rng: &mut impl Rng, d: usize) -> StateVector {
    loop {
        let v: Vec<Complex64> = (0..d).map(|_| gaussian(rng)).collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            return StateVector::single(v.into_iter().map(|z| z / n).collect()).expect("normalized");
        }
    }
}

pub fn pure_state(rng: &mut impl Rng, d: usize) -> DensityMatrix {
    unit_vector(rng, d).to_density()
}

/// Full-rank mixed state `G G† / Tr(G G†)` from a Ginibre matrix.
pub fn mixed_state(rng: &mut impl Rng, d: usize) -> DensityMatrix {
    let g = ComplexMatrix::new(d, d, (0..d * d).map(|_| gaussian(rng)).collect()).expect("finite");
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    let mut m = m.scale(Complex64::new(1.0 / tr, 0.0));
    // Exact Hermiticity after rounding.
    m = (&m + &m.adjoint()).scale(Complex64::new(0.5, 0.0));
    DensityMatrix::single(m).expect("Ginibre states are valid")
}

pub fn hermitian(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    let g = ComplexMatrix::new(d, d, (0..d * d).map(|_| gaussian(rng)).collect()).expect("finite");
    (&g + &g.adjoint()).scale(Complex64::new(0.5, 0.0))
}

/// Gram matrix of `d` random unit vectors in a space of random dimension
/// `1..=d`, so rank-deficient matrices show up too.
pub fn psd_unit_diagonal(rng: &mut impl Rng, d: usize) -> EntanglementMatrix {
    let rank = rng.gen_range(1..=d);
    let vs: Vec<StateVector> = (0..d).map(|_| unit_vector(rng, rank)).collect();
    let mut r = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            r[(i, j)] = vs[i].inner(&vs[j]);
        }
    }
    r = (&r + &r.adjoint()).scale(Complex64::new(0.5, 0.0));
    EntanglementMatrix::new(r).expect("Gram matrices are valid")
}

/// Hermitian unit-diagonal matrix with off-diagonal moduli up to `spread`.
pub fn hermitian_unit_diagonal(rng: &mut impl Rng, d: usize, spread: f64) -> EntanglementMatrix {
    let mut r = ComplexMatrix::identity(d);
    for i in 0..d {
        for j in i + 1..d {
            let modulus = spread * rng.gen::<f64>().sqrt();
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let z = Complex64::from_polar(modulus, phase);
            r[(i, j)] = z;
            r[(j, i)] = z.conj();
        }
    }
    EntanglementMatrix::hermitian_unit_diagonal(r).expect("constructed Hermitian with unit diagonal")
}

/// Hermitian unit-diagonal matrix whose smallest eigenvalue is below `-margin`.
pub fn non_psd_unit_diagonal(rng: &mut impl Rng, d: usize, margin: f64) -> EntanglementMatrix {
    assert!(d >= 2, "every 1x1 unit-diagonal matrix is positive");
    loop {
        let r = hermitian_unit_diagonal(rng, d, 2.0);
        if hermitian_eig(r.matrix()).expect("Hermitian").min() < -margin {
            return r;
        }
    }
}
