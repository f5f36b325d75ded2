//! Dense matrix equations: Lyapunov, algebraic Riccati, Newton–Kleinman.

mod care;
mod lyapunov;
mod newton;
mod schur;
mod spectral;

use nalgebra::DMatrix;
use serde::Serialize;

pub use care::{input_weight, solve_care, solve_care_s, CARE_REL_TOL};
pub use lyapunov::{solve_lyapunov, LyapunovSolver, LYAPUNOV_REL_TOL};
pub use newton::{
    newton_kleinman, newton_kleinman_s, nk_iterate, nk_iterates, NkOutcome, DEFAULT_NK_MAX_ITER,
    DEFAULT_NK_TOL,
};
pub use schur::RealSchur;
pub use spectral::{
    eigenvalues, eigenvectors, is_hurwitz, min_symmetric_eigenvalue, norm2, singular_values_desc,
    spectral_abscissa, spectral_info, DEFECTIVE_COND,
};

use crate::error::Result;

/// A stabilizing Riccati solution with diagnostics.
#[derive(Clone, Debug)]
pub struct RiccatiSolution {
    pub p: DMatrix<f64>,
    /// `‖AᵀP + PA − PSP + Q‖_F`.
    pub residual_norm: f64,
    /// Largest real part of `A − SP`.
    pub closed_loop_abscissa: f64,
    /// Newton–Kleinman steps (Lyapunov solves) taken.
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralInfo {
    /// `min |Re λ|`.
    pub alpha: f64,
    /// Condition number of the eigenvector matrix.
    pub cond_eigvec: f64,
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// `AᵀP + PA − PSP + Q`.
pub fn riccati_residual_matrix(
    a: &DMatrix<f64>,
    s: &DMatrix<f64>,
    q: &DMatrix<f64>,
    p: &DMatrix<f64>,
) -> DMatrix<f64> {
    let pa = p * a;
    let psp = p * s * p;
    symmetrize(&(pa.transpose() + pa - psp + q))
}

/// Frobenius norm of the Riccati residual at `p`.
pub fn riccati_residual(
    p: &DMatrix<f64>,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<f64> {
    let s = input_weight(b, r)?;
    Ok(riccati_residual_matrix(a, &s, q, p).norm())
}
