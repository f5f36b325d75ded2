use nalgebra::DMatrix;

use super::lyapunov::LyapunovSolver;
use super::schur::RealSchur;
use super::spectral::spectral_abscissa;
use super::{riccati_residual_matrix, symmetrize, RiccatiSolution};
use crate::error::{Error, Result};

/// Relative residual target `‖AᵀP + PA − PSP + Q‖_F ≤ tol · max(1, ‖Q‖_F)`.
pub const CARE_REL_TOL: f64 = 1e-9;

/// Newton–Kleinman polishing steps allowed after the Schur solve.
const MAX_REFINEMENTS: usize = 4;

/// `S = B R⁻¹ Bᵀ`, with `R` required symmetric positive definite.
pub fn input_weight(b: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if r.nrows() != r.ncols() || b.ncols() != r.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "B is {}x{}, R is {}x{}",
            b.nrows(),
            b.ncols(),
            r.nrows(),
            r.ncols()
        )));
    }
    let chol = symmetrize(r)
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("control weight R".into()))?;
    let rinv_bt = chol.solve(&b.transpose());
    Ok(symmetrize(&(b * rinv_bt)))
}

/// Stabilizing solution of `AᵀP + PA − P B R⁻¹ Bᵀ P + Q = 0`.
pub fn solve_care(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<RiccatiSolution> {
    if b.nrows() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{} but B has {} rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    let s = input_weight(b, r)?;
    solve_care_s(a, &s, q)
}

/// CARE in terms of the quadratic coefficient `S` directly.
///
/// The stable invariant subspace of the Hamiltonian `[[A, −S], [−Q, −Aᵀ]]`
/// is read off an ordered real Schur form; `P = U₂₁ U₁₁⁻¹`. If the residual
/// misses the target, a few Newton–Kleinman corrections are applied.
pub fn solve_care_s(a: &DMatrix<f64>, s: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<RiccatiSolution> {
    let n = a.nrows();
    for (name, m) in [("A", a), ("S", s), ("Q", q)] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{name} is {}x{}, expected {n}x{n}",
                m.nrows(),
                m.ncols()
            )));
        }
    }

    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-s));
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));

    let mut schur = RealSchur::new(&h)?;
    let stable = schur.reorder(|l| l.re < 0.0)?;
    if stable != n {
        return Err(Error::NoStabilizingSolution(format!(
            "Hamiltonian has {stable} stable eigenvalues, expected {n}"
        )));
    }
    let z = schur.q();
    let u11 = z.view((0, 0), (n, n)).clone_owned();
    let u21 = z.view((n, 0), (n, n)).clone_owned();

    let sv = u11.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 1e-13 * smax) {
        return Err(Error::NoStabilizingSolution(
            "stable subspace projection U11 is singular".into(),
        ));
    }
    let pt = u11
        .transpose()
        .lu()
        .solve(&u21.transpose())
        .ok_or_else(|| Error::NoStabilizingSolution("U11 is singular".into()))?;
    let mut p = symmetrize(&pt.transpose());

    let tol = CARE_REL_TOL * q.norm().max(1.0);
    let mut res = riccati_residual_matrix(a, s, q, &p);
    let mut nres = res.norm();
    let mut iterations = 0;
    while nres > tol && iterations < MAX_REFINEMENTS {
        let acl = a - s * &p;
        let lyap = LyapunovSolver::new(&acl).map_err(|e| match e {
            Error::NotHurwitz { abscissa } => Error::NoStabilizingSolution(format!(
                "closed loop of the Schur solution has abscissa {abscissa:e}"
            )),
            other => other,
        })?;
        let next = symmetrize(&(&p + lyap.solve(&res)?));
        let next_res = riccati_residual_matrix(a, s, q, &next);
        iterations += 1;
        if !(next_res.norm() < nres) {
            break;
        }
        p = next;
        res = next_res;
        nres = res.norm();
    }
    let residual_norm = res.norm();
    let closed_loop_abscissa = spectral_abscissa(&(a - s * &p))?;
    if closed_loop_abscissa >= 0.0 {
        return Err(Error::NoStabilizingSolution(format!(
            "closed-loop abscissa {closed_loop_abscissa:e}"
        )));
    }
    if residual_norm > tol {
        return Err(Error::IllConditioned {
            residual: residual_norm,
            tolerance: tol,
        });
    }
    Ok(RiccatiSolution {
        p,
        residual_norm,
        closed_loop_abscissa,
        iterations,
    })
}
