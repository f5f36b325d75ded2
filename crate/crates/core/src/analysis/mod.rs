//! HJB residual of the SDRE value function `V_S(x) = xᵀP(x)x`.
//!
//! With `∇V_S = 2Px + φ`, `[φ]_i = xᵀ P_{x_i} x` and `P_{x_i}` from
//! `P_{x_i} A_cl + A_clᵀ P_{x_i} + Λ_i = 0`, where
//! `Λ_i = P A_{x_i} + A_{x_i}ᵀ P − P (B_{x_i} R⁻¹ Bᵀ + B R⁻¹ B_{x_i}ᵀ) P`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mateq::{riccati_residual_matrix, LyapunovSolver};
use crate::model::{eval_semilinear, QuadraticCost, SemilinearModel};
use crate::sim::TrajectoryRecord;

/// Which expression for `E(x)` to evaluate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualForm {
    /// `φ·((A − SP)x − ¼Sφ)`: the HJB defect of `V_S` once the SDRE holds.
    #[default]
    ClosedLoop,
    /// `φ·(A x − ¼Sφ)`, omitting the `−φᵀSPx` cross term.
    AsPublished,
}

/// `|E|` at the final time above this marks an unconverged tail.
pub const TAIL_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub phi: DVector<f64>,
    pub e_value: f64,
    pub lyap_solves: usize,
    /// `E` recovered by substituting `∇V_S` into the unconstrained HJB.
    pub hjb_residual_direct: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundEstimate {
    pub integral_along_trajectory: f64,
    pub horizon: f64,
    pub tail_flag: bool,
}

/// `Λ_i` for every coordinate, from the sparse derivative maps.
fn lambda_matrices<'a>(
    model: &'a dyn SemilinearModel,
    cost: &QuadraticCost,
    x: &DVector<f64>,
    p: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> impl IndexedParallelIterator<Item = DMatrix<f64>> + 'a {
    let d = x.len();
    let r_inv_bt = cost.r_solve(&b.transpose());
    let p = p.clone();
    let x = x.clone();
    (0..d).into_par_iter().map(move |i| {
        let pa = model.a_partial(&x, i).left_mul(&p);
        let mut lam = pa.transpose() + pa;
        let bi = model.b_partial(&x, i);
        if !bi.is_zero() {
            let t = bi.to_dense() * &r_inv_bt;
            lam -= &p * (t.transpose() + t) * &p;
        }
        lam
    })
}

fn closed_loop(
    model: &dyn SemilinearModel,
    cost: &QuadraticCost,
    x: &DVector<f64>,
    p: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (a, b) = eval_semilinear(model, x)?;
    if p.nrows() != a.nrows() || p.ncols() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "P is {}x{}, state dimension {}",
            p.nrows(),
            p.ncols(),
            a.nrows()
        )));
    }
    let acl = &a - cost.s_at(model, x) * p;
    Ok((acl, b))
}

/// `φ(x)` by one Lyapunov solve per coordinate, all sharing the Schur
/// factorization of `A_cl`.
pub fn compute_phi(
    model: &dyn SemilinearModel,
    cost: &QuadraticCost,
    x: &DVector<f64>,
    p: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    let (acl, b) = closed_loop(model, cost, x, p)?;
    let lyap = LyapunovSolver::new(&acl)?;
    let phi: Vec<f64> = lambda_matrices(model, cost, x, p, &b)
        .map(|lam| lyap.solve(&lam).map(|pi| x.dot(&(pi * x))))
        .collect::<Result<_>>()?;
    Ok(DVector::from_vec(phi))
}

/// `φ(x)` through the adjoint identity `xᵀP_{x_i}x = ⟨Λ_i, Y⟩` with
/// `A_cl Y + Y A_clᵀ + x xᵀ = 0`: one Lyapunov solve in total.
pub fn compute_phi_adjoint(
    model: &dyn SemilinearModel,
    cost: &QuadraticCost,
    x: &DVector<f64>,
    p: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    let (acl, b) = closed_loop(model, cost, x, p)?;
    let y = LyapunovSolver::new(&acl.transpose())?.solve(&(x * x.transpose()))?;
    let phi: Vec<f64> = lambda_matrices(model, cost, x, p, &b)
        .map(|lam| lam.dot(&y))
        .collect();
    Ok(DVector::from_vec(phi))
}

/// `E(x)` in the requested form. The sign is preserved.
pub fn hjb_residual(
    model: &dyn SemilinearModel,
    cost: &QuadraticCost,
    x: &DVector<f64>,
    p: &DMatrix<f64>,
    phi: &DVector<f64>,
    form: ResidualForm,
) -> Result<f64> {
    let (a, _) = eval_semilinear(model, x)?;
    if phi.len() != x.len() || p.nrows() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "phi has length {}, P is {}x{}, state length {}",
            phi.len(),
            p.nrows(),
            p.ncols(),
            x.len()
        )));
    }
    let s = cost.s_at(model, x);
    let mut v = a * x - (&s * phi) * 0.25;
    if form == ResidualForm::ClosedLoop {
        v -= &s * (p * x);
    }
    Ok(phi.dot(&v))
}

/// `∇V_Sᵀ f − ¼ ∇V_Sᵀ S ∇V_S + xᵀQx − xᵀ𝓡(P)x` with the model's own drift;
/// equals the closed-loop form of `E`.
pub fn hjb_residual_substitution(
    model: &dyn SemilinearModel,
    cost: &QuadraticCost,
    x: &DVector<f64>,
    p: &DMatrix<f64>,
    phi: &DVector<f64>,
) -> Result<f64> {
    let (a, _) = eval_semilinear(model, x)?;
    let s = cost.s_at(model, x);
    let grad = value_gradient(p, phi, x);
    let f = model.drift(x);
    let res = riccati_residual_matrix(&a, &s, cost.q(), p);
    Ok(grad.dot(&f) - 0.25 * grad.dot(&(&s * &grad)) + x.dot(&(cost.q() * x))
        - x.dot(&(res * x)))
}

/// `∇V_S = 2Px + φ`.
pub fn value_gradient(p: &DMatrix<f64>, phi: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
    p * x * 2.0 + phi
}

/// `ũ_S = −½ R⁻¹ Bᵀ (2Px + φ)`.
pub fn corrected_control(
    model: &dyn SemilinearModel,
    cost: &QuadraticCost,
    x: &DVector<f64>,
    p: &DMatrix<f64>,
    phi: &DVector<f64>,
) -> Result<DVector<f64>> {
    let (_, b) = eval_semilinear(model, x)?;
    Ok(-cost.r_solve_vec(&(b.transpose() * value_gradient(p, phi, x))) * 0.5)
}

/// `∇Vᵀ(f(x) + B(x)u) + xᵀQx + uᵀRu`, the quantity minimized over `u` in
/// the HJB equation.
pub fn hjb_bracket(
    model: &dyn SemilinearModel,
    cost: &QuadraticCost,
    x: &DVector<f64>,
    grad: &DVector<f64>,
    u: &DVector<f64>,
) -> f64 {
    grad.dot(&(model.drift(x) + model.b_of_x(x) * u)) + cost.running(x, u)
}

/// `xᵀQx + uᵀRu + e`.
pub fn augmented_running_cost(cost: &QuadraticCost, x: &DVector<f64>, u: &DVector<f64>, e: f64) -> f64 {
    cost.running(x, u) + e
}

pub fn residual_report(
    model: &dyn SemilinearModel,
    cost: &QuadraticCost,
    x: &DVector<f64>,
    p: &DMatrix<f64>,
    form: ResidualForm,
) -> Result<ResidualReport> {
    let phi = compute_phi(model, cost, x, p)?;
    let e_value = hjb_residual(model, cost, x, p, &phi, form)?;
    let hjb_residual_direct = hjb_residual_substitution(model, cost, x, p, &phi)?;
    Ok(ResidualReport {
        lyap_solves: x.len(),
        phi,
        e_value,
        hjb_residual_direct,
    })
}

/// Trapezoidal `∫|E| dt` over the steps where `E` was evaluated.
pub fn bound_integral(record: &TrajectoryRecord) -> Result<BoundEstimate> {
    let pts = residual_points(record);
    let Some(&(horizon, e_last)) = pts.last() else {
        return Err(Error::EmptyTrajectory);
    };
    let integral = pts
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1.abs() + w[1].1.abs()))
        .sum();
    Ok(BoundEstimate {
        integral_along_trajectory: integral,
        horizon,
        tail_flag: e_last.abs() > TAIL_THRESHOLD,
    })
}

/// Running value of the bound integral at each step with an `E` sample.
pub fn bound_partials(record: &TrajectoryRecord) -> Vec<Option<f64>> {
    let mut acc = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    record
        .times
        .iter()
        .zip(&record.residuals)
        .map(|(&t, e)| {
            e.map(|e| {
                if let Some((t0, e0)) = prev {
                    acc += 0.5 * (t - t0) * (e0.abs() + e.abs());
                }
                prev = Some((t, e));
                acc
            })
        })
        .collect()
}

fn residual_points(record: &TrajectoryRecord) -> Vec<(f64, f64)> {
    record
        .times
        .iter()
        .zip(&record.residuals)
        .filter_map(|(&t, e)| e.map(|e| (t, e)))
        .collect()
}
