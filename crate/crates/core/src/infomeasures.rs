//! Entropies and coherent information of entangling measurements.
//!
//! All entropies are in bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extops::extended_entangling_abd;
use crate::qmat::{ComplexMatrix, DensityMatrix, TOL_PSD};
use crate::superop::EntanglementMatrix;

/// Entropy budget of one entangling measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoReport {
    /// `S[ρ_red]`
    pub s_red: f64,
    /// `S[ρ_D]`
    pub s_d: f64,
    /// Entropy of the apparatus marginal.
    pub s_b: f64,
    /// Entropy of the object–apparatus state.
    pub s_ab: f64,
    /// `S[ρ_red] − S[ρ_D]`
    pub i_c_formula: f64,
    /// `S[ρ_B] − S[ρ_AB]`
    pub i_c_general: f64,
}

/// `−Σ λ log₂ λ`, with eigenvalues in `[−TOL_PSD, 0)` treated as zero.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_bits(&rho.eigenvalues())
}

fn entropy_bits(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &lambda in eigenvalues {
        if lambda < -TOL_PSD {
            return Err(Error::InvalidState(format!("negative eigenvalue {lambda:e}")));
        }
        if lambda > 0.0 {
            s -= lambda * lambda.log2();
        }
    }
    // Rounding can leave -0.0 or a few ulps below zero for pure states.
    Ok(s.max(0.0))
}

/// Diagonal part of `ρ_A` in the measurement basis.
pub fn reduced_density(rho_a: &DensityMatrix) -> DensityMatrix {
    let diag = ComplexMatrix::diag_real(&rho_a.populations());
    DensityMatrix::new(diag, rho_a.dims().to_vec()).expect("diagonal of a state is a state")
}

/// `ρ_D = Σ_i p_i ||i⟩⟩⟨⟨i||` with `p_i = ⟨i|ρ_A|i⟩`.
pub fn microstate_density(rho_a: &DensityMatrix, r: &EntanglementMatrix) -> Result<DensityMatrix> {
    if rho_a.dim() != r.d() {
        return Err(Error::DimensionMismatch(format!(
            "state has dimension {}, entanglement matrix {}",
            rho_a.dim(),
            r.d()
        )));
    }
    let micro = r.microstates()?;
    let d_d = micro[0].dim();
    let mut m = ComplexMatrix::zeros(d_d, d_d);
    for (p, v) in rho_a.populations().into_iter().zip(&micro) {
        m = &m + &v.projector().scale(p.into());
    }
    DensityMatrix::new(m, vec![d_d])
}

/// `S[Tr_rest ρ] − S[ρ]`, keeping the subsystems in `b_subsystems`.
pub fn coherent_information_general(rho_out: &DensityMatrix, b_subsystems: &[usize]) -> Result<f64> {
    let n = rho_out.dims().len();
    let mut b = b_subsystems.to_vec();
    b.sort_unstable();
    b.dedup();
    if b.is_empty() || b.len() >= n || b.iter().any(|&s| s >= n) {
        return Err(Error::InvalidSubsystems(format!(
            "{b_subsystems:?} is not a nonempty proper subset of {n} subsystems"
        )));
    }
    let rho_b = rho_out.partial_trace(&b)?;
    Ok(von_neumann_entropy(&rho_b)? - von_neumann_entropy(rho_out)?)
}

/// Both routes to the coherent information of the entangling measurement
/// with matrix `r` applied to `rho_a`.
///
/// The general route evaluates the object–apparatus–internal output state.
/// The two routes coincide when `rho_a` is pure; for a mixed input the joint
/// object–apparatus entropy also carries the input's own mixedness and
/// `i_c_general` falls below `i_c_formula`.
pub fn coherent_information_measurement(rho_a: &DensityMatrix, r: &EntanglementMatrix) -> Result<InfoReport> {
    let rho_red = reduced_density(rho_a);
    let rho_d = microstate_density(rho_a, r)?;
    let s_red = von_neumann_entropy(&rho_red)?;
    let s_d = von_neumann_entropy(&rho_d)?;

    let rho_abd = extended_entangling_abd(r)?.apply(rho_a)?;
    let s_b = von_neumann_entropy(&rho_abd.partial_trace(&[1])?)?;
    let s_ab = von_neumann_entropy(&rho_abd.partial_trace(&[0, 1])?)?;

    Ok(InfoReport {
        s_red,
        s_d,
        s_b,
        s_ab,
        i_c_formula: s_red - s_d,
        i_c_general: s_b - s_ab,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::StateVector;
    use crate::superop::projective;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn h2(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    fn plus() -> DensityMatrix {
        DensityMatrix::single(ComplexMatrix::from_real(2, 2, &[0.5; 4])).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(von_neumann_entropy(&plus()).unwrap(), 0.0);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(2)).unwrap() - 1.0).abs() < 1e-15);
        let rho = DensityMatrix::single(ComplexMatrix::diag_real(&[0.75, 0.25])).unwrap();
        let s = von_neumann_entropy(&rho).unwrap();
        assert!((s - h2(0.25)).abs() < 1e-15);
        assert!((s - 0.811_278_124_459_132_8).abs() < 1e-15);
    }

    #[test]
    fn entropy_rejects_negative_spectrum() {
        assert!(entropy_bits(&[1.1, -0.1]).is_err());
        assert_eq!(entropy_bits(&[1.0, -1e-12]).unwrap(), 0.0);
    }

    #[test]
    fn reduced_density_is_projective_output() {
        assert_eq!(reduced_density(&plus()).matrix(), DensityMatrix::maximally_mixed(2).matrix());
        let diag = DensityMatrix::single(ComplexMatrix::diag_real(&[0.2, 0.8])).unwrap();
        assert_eq!(reduced_density(&diag), diag);
        let rho = DensityMatrix::single(ComplexMatrix::from_rows(vec![
            vec![c(0.6, 0.0), c(0.1, 0.4)],
            vec![c(0.1, -0.4), c(0.4, 0.0)],
        ]))
        .unwrap();
        assert_eq!(reduced_density(&rho), projective(2).apply(&rho).unwrap());
    }

    #[test]
    fn microstate_density_limits() {
        let rho = DensityMatrix::single(ComplexMatrix::from_rows(vec![
            vec![c(0.6, 0.0), c(0.1, 0.4)],
            vec![c(0.1, -0.4), c(0.4, 0.0)],
        ]))
        .unwrap();
        let orth = microstate_density(&rho, &EntanglementMatrix::identity(2)).unwrap();
        assert!(orth.matrix().max_abs_diff(reduced_density(&rho).matrix()) < 1e-12);
        let coherent = microstate_density(&rho, &EntanglementMatrix::all_ones(2)).unwrap();
        assert!(coherent.matrix().max_abs_diff(&ComplexMatrix::unit(2, 0, 0)) < 1e-12);
    }

    #[test]
    fn microstate_density_spectrum() {
        // p = (½, ½): trace 1, det (1 − |q|²)/4, eigenvalues (1 ± |q|)/2.
        for q in [c(0.5, 0.0), c(0.3, 0.4), c(-0.8, 0.1)] {
            let rho_d = microstate_density(&plus(), &EntanglementMatrix::qubit(q).unwrap()).unwrap();
            let e = rho_d.eigenvalues();
            assert!((e[0] - (1.0 + q.norm()) / 2.0).abs() < 1e-12);
            assert!((e[1] - (1.0 - q.norm()) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_information_of_plus_state() {
        let full = coherent_information_measurement(&plus(), &EntanglementMatrix::all_ones(2)).unwrap();
        assert!((full.i_c_formula - 1.0).abs() < 1e-12);
        let none = coherent_information_measurement(&plus(), &EntanglementMatrix::identity(2)).unwrap();
        assert!(none.i_c_formula.abs() < 1e-12);
        assert!((none.s_d - none.s_red).abs() < 1e-12);
        let half = coherent_information_measurement(&plus(), &EntanglementMatrix::qubit(c(0.5, 0.0)).unwrap()).unwrap();
        assert!((half.i_c_formula - (1.0 - h2(0.75))).abs() < 1e-12);
        for rep in [full, none, half] {
            assert!((rep.i_c_formula - rep.i_c_general).abs() < 1e-9);
            assert!((rep.s_ab - rep.s_d).abs() < 1e-9);
            assert!((rep.s_b - rep.s_red).abs() < 1e-9);
        }
    }

    #[test]
    fn mixed_input_separates_the_routes() {
        let rep = coherent_information_measurement(&DensityMatrix::maximally_mixed(2), &EntanglementMatrix::all_ones(2)).unwrap();
        assert!((rep.i_c_formula - 1.0).abs() < 1e-12);
        assert!(rep.i_c_general.abs() < 1e-12);
    }

    #[test]
    fn general_coherent_information() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = StateVector::new(vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)], vec![2, 2])
            .unwrap()
            .to_density();
        assert!((coherent_information_general(&phi, &[1]).unwrap() - 1.0).abs() < 1e-12);

        let rho_a = DensityMatrix::single(ComplexMatrix::diag_real(&[0.75, 0.25])).unwrap();
        let rho_b = DensityMatrix::single(ComplexMatrix::diag_real(&[0.5, 0.5])).unwrap();
        let ic = coherent_information_general(&rho_a.tensor(&rho_b), &[1]).unwrap();
        assert!((ic + h2(0.25)).abs() < 1e-12);

        assert!(coherent_information_general(&phi, &[]).is_err());
        assert!(coherent_information_general(&phi, &[0, 1]).is_err());
        assert!(coherent_information_general(&phi, &[2]).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        assert!(microstate_density(&plus(), &EntanglementMatrix::identity(3)).is_err());
    }
}
