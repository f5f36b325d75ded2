//! Newton–Kleinman iteration for the CARE.
//!
//! Each step solves `(A − S Pₖ)ᵀ ΔP + ΔP (A − S Pₖ) = −𝓡(Pₖ)` and sets
//! `Pₖ₊₁ = Pₖ + ΔP`. Started from a stabilizing guess, every iterate
//! stabilizes and the sequence decreases monotonically from `P₁` onward.

use nalgebra::DMatrix;

use super::care::input_weight;
use super::lyapunov::LyapunovSolver;
use super::spectral::spectral_abscissa;
use super::{riccati_residual_matrix, symmetrize, RiccatiSolution};
use crate::error::{Error, Result};

pub const DEFAULT_NK_TOL: f64 = 1e-5;
pub const DEFAULT_NK_MAX_ITER: usize = 50;

/// Result of the bare iteration; no spectral post-processing.
#[derive(Clone, Debug)]
pub struct NkOutcome {
    pub p: DMatrix<f64>,
    pub residual_norm: f64,
    /// Number of Lyapunov solves performed.
    pub iterations: usize,
}

/// Newton–Kleinman from `p_init` until `‖𝓡‖_F ≤ tol`.
pub fn newton_kleinman(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    p_init: &DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<RiccatiSolution> {
    let s = input_weight(b, r)?;
    newton_kleinman_s(a, &s, q, p_init, tol, max_iter)
}

/// As [`newton_kleinman`], with `S = B R⁻¹ Bᵀ` supplied. The guess is
/// checked for stabilization up front and the closed-loop abscissa of the
/// result is reported.
pub fn newton_kleinman_s(
    a: &DMatrix<f64>,
    s: &DMatrix<f64>,
    q: &DMatrix<f64>,
    p_init: &DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<RiccatiSolution> {
    check_dims(a, s, q, p_init)?;
    let abscissa0 = spectral_abscissa(&(a - s * p_init))?;
    if abscissa0 >= 0.0 {
        return Err(Error::NotStabilizingGuess {
            abscissa: abscissa0,
        });
    }
    match nk_iterate(a, s, q, p_init, tol, max_iter) {
        Ok(out) => {
            let closed_loop_abscissa = if out.iterations == 0 {
                abscissa0
            } else {
                spectral_abscissa(&(a - s * &out.p))?
            };
            Ok(RiccatiSolution {
                p: out.p,
                residual_norm: out.residual_norm,
                closed_loop_abscissa,
                iterations: out.iterations,
            })
        }
        Err(Error::MaxIterations { mut last }) => {
            last.closed_loop_abscissa = spectral_abscissa(&(a - s * &last.p))?;
            Err(Error::MaxIterations { last })
        }
        Err(e) => Err(e),
    }
}

/// The iteration proper. A guess whose residual already meets `tol` is
/// returned unchanged without any factorization, so the stabilization
/// requirement is only enforced (as `NotStabilizingGuess`) once a Lyapunov
/// solve is actually needed.
pub fn nk_iterate(
    a: &DMatrix<f64>,
    s: &DMatrix<f64>,
    q: &DMatrix<f64>,
    p_init: &DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<NkOutcome> {
    check_dims(a, s, q, p_init)?;
    let mut p = symmetrize(p_init);
    let mut res = riccati_residual_matrix(a, s, q, &p);
    let mut nres = res.norm();
    let mut iterations = 0;
    while nres > tol {
        if iterations == max_iter {
            return Err(Error::MaxIterations {
                last: Box::new(RiccatiSolution {
                    p,
                    residual_norm: nres,
                    closed_loop_abscissa: f64::NAN,
                    iterations,
                }),
            });
        }
        let acl = a - s * &p;
        let lyap = LyapunovSolver::new(&acl).map_err(|e| match e {
            Error::NotHurwitz { abscissa } if iterations == 0 => {
                Error::NotStabilizingGuess { abscissa }
            }
            other => other,
        })?;
        p += lyap.solve(&res)?;
        p = symmetrize(&p);
        res = riccati_residual_matrix(a, s, q, &p);
        nres = res.norm();
        iterations += 1;
        if !nres.is_finite() {
            return Err(Error::NoStabilizingSolution(
                "Newton-Kleinman iterate became non-finite".into(),
            ));
        }
    }
    Ok(NkOutcome {
        p,
        residual_norm: nres,
        iterations,
    })
}

/// The first `count` Newton–Kleinman iterates after `p_init` (no stopping
/// test); used to inspect convergence behaviour.
pub fn nk_iterates(
    a: &DMatrix<f64>,
    s: &DMatrix<f64>,
    q: &DMatrix<f64>,
    p_init: &DMatrix<f64>,
    count: usize,
) -> Result<Vec<DMatrix<f64>>> {
    check_dims(a, s, q, p_init)?;
    let mut out = Vec::with_capacity(count);
    let mut p = symmetrize(p_init);
    for k in 0..count {
        let res = riccati_residual_matrix(a, s, q, &p);
        if res.norm() == 0.0 {
            out.push(p.clone());
            continue;
        }
        let lyap = LyapunovSolver::new(&(a - s * &p)).map_err(|e| match e {
            Error::NotHurwitz { abscissa } if k == 0 => Error::NotStabilizingGuess { abscissa },
            other => other,
        })?;
        p = symmetrize(&(&p + lyap.solve(&res)?));
        out.push(p.clone());
    }
    Ok(out)
}

fn check_dims(
    a: &DMatrix<f64>,
    s: &DMatrix<f64>,
    q: &DMatrix<f64>,
    p: &DMatrix<f64>,
) -> Result<()> {
    let n = a.nrows();
    for (name, m) in [("A", a), ("S", s), ("Q", q), ("P", p)] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{name} is {}x{}, expected {n}x{n}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v)
    }

    #[test]
    fn scalar_quadratic_convergence() {
        let (a, s, q) = (scalar(-1.0), scalar(1.0), scalar(1.0));
        let iterates = nk_iterates(&a, &s, &q, &scalar(0.0), 5).unwrap();
        let exact = 2f64.sqrt() - 1.0;
        let errs: Vec<f64> = iterates.iter().map(|p| (p[(0, 0)] - exact).abs()).collect();
        for w in errs.windows(2).take(3) {
            if w[0] > 1e-12 {
                // e_{k+1} = s e_k² / (2 |a - s p_k|) ≤ e_k² / 2 here.
                assert!(w[1] <= 0.5 * w[0] * w[0] * (1.0 + 1e-9) + 1e-16, "{errs:?}");
            }
        }
        let sol = newton_kleinman_s(&a, &s, &q, &scalar(0.0), 1e-14, 20).unwrap();
        assert!((sol.p[(0, 0)] - exact).abs() < 1e-14);
    }

    #[test]
    fn fixed_point_needs_no_iteration() {
        let exact = scalar(2f64.sqrt() - 1.0);
        let sol = newton_kleinman_s(&scalar(-1.0), &scalar(1.0), &scalar(1.0), &exact, 1e-12, 5)
            .unwrap();
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn destabilizing_guess_is_rejected() {
        // a - s p = 1 - 0 > 0.
        let err = newton_kleinman_s(&scalar(1.0), &scalar(1.0), &scalar(1.0), &scalar(0.0), 1e-8, 5)
            .unwrap_err();
        assert!(matches!(err, Error::NotStabilizingGuess { .. }));
    }

    #[test]
    fn iteration_cap_reports_last_iterate() {
        let err = newton_kleinman_s(&scalar(-1.0), &scalar(1.0), &scalar(1.0), &scalar(0.0), 1e-15, 1)
            .unwrap_err();
        match err {
            Error::MaxIterations { last } => {
                assert_eq!(last.iterations, 1);
                assert!(last.residual_norm > 0.0);
                assert!(last.closed_loop_abscissa < 0.0);
            }
            other => panic!("unexpected {other}"),
        }
    }
}
