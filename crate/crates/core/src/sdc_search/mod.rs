//! Residual along the one-parameter family `A(x) + α Z(x)` and its zeros.

use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{compute_phi, hjb_residual, ResidualForm};
use crate::error::{Error, Result};
use crate::mateq::solve_care_s;
use crate::model::{eval_semilinear, perturbed_model, QuadraticCost, SemilinearModel, ZPerturbation};

pub const ROOT_FTOL: f64 = 1e-10;
pub const ROOT_XTOL: f64 = 1e-12;
pub const MAX_ROOT_ITER: usize = 200;

#[derive(Clone, Debug, Serialize)]
pub struct ResidualProfile {
    pub alphas: Vec<f64>,
    /// `None` where the perturbed SDRE could not be solved.
    pub e_values: Vec<Option<f64>>,
    /// First adjacent pair of available samples with a sign change.
    pub bracket: Option<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Root {
    pub alpha_star: f64,
    pub e_at_root: f64,
    pub bracket: (f64, f64),
    pub evaluations: usize,
}

/// `n` uniform points on `[lo, hi]`.
pub fn alpha_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// 41 points on `[−10, 10]`.
pub fn default_alpha_grid() -> Vec<f64> {
    alpha_grid(-10.0, 10.0, 41)
}

/// `E(x)` for `A(x) + α Z(x)`: SDRE solve, `φ`, then `E`.
pub fn residual_at(
    model: &Arc<dyn SemilinearModel>,
    cost: &QuadraticCost,
    x: &DVector<f64>,
    z: ZPerturbation,
    alpha: f64,
    form: ResidualForm,
) -> Result<f64> {
    let pm = perturbed_model(model.clone(), z, alpha)?;
    let (a, _) = eval_semilinear(&pm, x)?;
    let s = cost.s_at(&pm, x);
    let p = solve_care_s(&a, &s, cost.q())?.p;
    let phi = compute_phi(&pm, cost, x, &p)?;
    hjb_residual(&pm, cost, x, &p, &phi, form)
}

pub fn scan_residual(
    model: &Arc<dyn SemilinearModel>,
    cost: &QuadraticCost,
    x: &DVector<f64>,
    z: ZPerturbation,
    grid: &[f64],
    form: ResidualForm,
) -> Result<ResidualProfile> {
    z.check(model.dim_state())?;
    let mut alphas = grid.to_vec();
    alphas.sort_by(f64::total_cmp);
    let e_values: Vec<Option<f64>> = alphas
        .par_iter()
        .map(|&a| match residual_at(model, cost, x, z, a, form) {
            Ok(e) if e.is_finite() => Some(e),
            Ok(_) => None,
            Err(err) => {
                log::warn!("residual at alpha = {a}: {err}");
                None
            }
        })
        .collect();
    let bracket = first_sign_change(&alphas, &e_values);
    Ok(ResidualProfile {
        alphas,
        e_values,
        bracket,
    })
}

fn first_sign_change(alphas: &[f64], e: &[Option<f64>]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = alphas
        .iter()
        .zip(e)
        .filter_map(|(&a, e)| e.map(|e| (a, e)))
        .collect();
    if let Some(&(a, _)) = pts.iter().find(|p| p.1 == 0.0) {
        return Some((a, a));
    }
    pts.windows(2)
        .find(|w| w[0].1.signum() != w[1].1.signum())
        .map(|w| (w[0].0, w[1].0))
}

/// Zero of `E(α)` inside `bracket`.
pub fn find_root(
    model: &Arc<dyn SemilinearModel>,
    cost: &QuadraticCost,
    x: &DVector<f64>,
    z: ZPerturbation,
    bracket: (f64, f64),
    form: ResidualForm,
) -> Result<Root> {
    brent(
        |a| residual_at(model, cost, x, z, a, form),
        bracket.0,
        bracket.1,
        ROOT_FTOL,
        ROOT_XTOL,
        MAX_ROOT_ITER,
    )
}

/// Scan, then refine. A grid sample already within [`ROOT_FTOL`] is returned
/// as is; otherwise the first sign change is refined. `NoBracket` carries the
/// residuals at the grid ends when no sign change exists.
pub fn locate_root(
    model: &Arc<dyn SemilinearModel>,
    cost: &QuadraticCost,
    x: &DVector<f64>,
    z: ZPerturbation,
    grid: &[f64],
    form: ResidualForm,
) -> Result<(ResidualProfile, Root)> {
    let profile = scan_residual(model, cost, x, z, grid, form)?;
    let root = root_from_profile(model, cost, x, z, &profile, form)?;
    Ok((profile, root))
}

/// Root search on an existing scan: a sample with `|E| ≤ ROOT_FTOL` is taken
/// as is, otherwise the first sign change is refined.
pub fn root_from_profile(
    model: &Arc<dyn SemilinearModel>,
    cost: &QuadraticCost,
    x: &DVector<f64>,
    z: ZPerturbation,
    profile: &ResidualProfile,
    form: ResidualForm,
) -> Result<Root> {
    let evaluations = profile.alphas.len();
    let hit = profile
        .alphas
        .iter()
        .zip(&profile.e_values)
        .find_map(|(&a, e)| e.filter(|e| e.abs() <= ROOT_FTOL).map(|e| (a, e)));
    if let Some((a, e)) = hit {
        return Ok(Root {
            alpha_star: a,
            e_at_root: e,
            bracket: (a, a),
            evaluations,
        });
    }
    let Some(bracket) = profile.bracket else {
        let finite: Vec<f64> = profile.e_values.iter().flatten().copied().collect();
        return Err(Error::NoBracket {
            e_lo: finite.first().copied().unwrap_or(f64::NAN),
            e_hi: finite.last().copied().unwrap_or(f64::NAN),
        });
    };
    let mut root = find_root(model, cost, x, z, bracket, form)?;
    root.evaluations += evaluations;
    Ok(root)
}

/// Brent's method: inverse quadratic / secant steps, safeguarded by
/// bisection so the iterate never leaves the bracket. Stops when
/// `|f| ≤ ftol` or the bracket is narrower than `xtol`.
#[allow(clippy::explicit_counter_loop)]
pub fn brent<F>(mut f: F, lo: f64, hi: f64, ftol: f64, xtol: f64, max_iter: usize) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let bracket = (lo.min(hi), lo.max(hi));
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    let mut evals = 2;
    let done = |alpha_star, e_at_root, evaluations| Root {
        alpha_star,
        e_at_root,
        bracket,
        evaluations,
    };
    if fa.abs() <= ftol && fa.abs() <= fb.abs() {
        return Ok(done(a, fa, evals));
    }
    if fb.abs() <= ftol {
        return Ok(done(b, fb, evals));
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket { e_lo: fa, e_hi: fb });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if fb.abs() <= ftol || xm.abs() <= tol1 {
            return Ok(done(b, fb, evals));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
        evals += 1;
    }
    Err(Error::MaxBisections(max_iter))
}
