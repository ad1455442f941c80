//! Dense complex linear algebra for small quantum systems.
//!
//! Everything here is sized for a handful of qubits or qutrits (operator
//! dimensions up to a few dozen). Subsystems are ordered so that the first
//! listed factor varies slowest in a flattened index.

mod linalg;
mod matrix;
mod state;

pub use linalg::{gram_factor, hermitian_eig, is_psd, Eigen};
pub use matrix::{kron, kron_all, ComplexMatrix};
pub use state::{partial_trace, DensityMatrix, StateVector};

/// Hermiticity tolerance.
pub const TOL_HERM: f64 = 1e-10;
/// Trace and norm tolerance.
pub const TOL_TRACE: f64 = 1e-10;
/// Eigenvalues in `[-TOL_PSD, 0)` count as zero.
pub const TOL_PSD: f64 = 1e-9;
/// Reconstruction and unitarity tolerance.
pub const TOL_EIG: f64 = 1e-9;
