//! Dense complex linear algebra kernels.
//!
//! Everything here is sized for the small matrices the bound pipeline
//! produces (a few states, tensor-power Gram matrices of order n). The
//! Hermitian eigensolver is a cyclic complex Jacobi iteration; the SVD,
//! square root, Gram factorization and polar decomposition are all built
//! on top of it.

mod decomp;
mod eig;
mod mat;

pub use decomp::{
    matrix_sqrt_psd, polar_max_unitary, psd_factor, pseudo_inverse, svd, PolarResult, PsdFactor,
    Svd,
};
pub use eig::{hermitian_eig, EigResult};
pub use mat::{inner, vec_norm, Mat, C64};

pub(crate) use mat::{ONE, ZERO};

/// Default relative rank tolerance (fraction of the largest eigenvalue).
pub const RANK_TOL: f64 = 1e-12;

/// Off-diagonal Frobenius mass at which the Jacobi iteration stops, relative to `‖h‖_F`.
pub const JACOBI_TOL: f64 = 1e-14;

/// Jacobi sweep cap.
pub const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (relative defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },
    #[error("Jacobi iteration did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
}
