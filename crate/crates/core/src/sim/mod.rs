//! Closed-loop time stepping and the receding-horizon driver.

use std::time::Instant;

use nalgebra::{DMatrix, DVector, Dyn, LU};
use serde::{Deserialize, Serialize};

use crate::analysis::{compute_phi, corrected_control, hjb_residual, ResidualForm};
use crate::error::{Error, Result};
use crate::model::{QuadraticCost, SemilinearModel};
use crate::sdre::StrategyState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `(I − dt·L) y⁺ = y + dt·(f(y) − L y + B u)`.
    SemiImplicitEuler,
    Rk4,
}

#[derive(Clone, Debug)]
pub struct IntegratorSpec {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_final: f64,
    /// Stiff linear part `L` treated implicitly; explicit Euler if absent.
    pub implicit_part: Option<DMatrix<f64>>,
}

impl IntegratorSpec {
    pub fn new(scheme: Scheme, dt: f64, t_final: f64) -> Self {
        IntegratorSpec {
            scheme,
            dt,
            t_final,
            implicit_part: None,
        }
    }

    pub fn with_implicit_part(mut self, l: Option<DMatrix<f64>>) -> Self {
        self.implicit_part = l;
        self
    }

    /// Number of steps, `round(t_final / dt)`.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// An [`IntegratorSpec`] with `I − dt·L` factored once.
#[derive(Clone, Debug)]
pub struct Integrator {
    spec: IntegratorSpec,
    lu: Option<LU<f64, Dyn, Dyn>>,
}

impl Integrator {
    pub fn new(spec: IntegratorSpec) -> Result<Self> {
        if !(spec.dt > 0.0 && spec.t_final > 0.0 && spec.dt <= spec.t_final) {
            return Err(Error::InvalidParams(format!(
                "need 0 < dt <= t_final, got dt = {}, t_final = {}",
                spec.dt, spec.t_final
            )));
        }
        let lu = match (&spec.scheme, &spec.implicit_part) {
            (Scheme::SemiImplicitEuler, Some(l)) => {
                let n = l.nrows();
                let m = DMatrix::identity(n, n) - l * spec.dt;
                let lu = m.lu();
                let u = lu.u();
                let scale = u.diagonal().amax();
                let min_pivot = u.diagonal().iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
                if !(min_pivot > f64::EPSILON * scale) {
                    return Err(Error::SingularImplicitOperator);
                }
                Some(lu)
            }
            _ => None,
        };
        Ok(Integrator { spec, lu })
    }

    pub fn spec(&self) -> &IntegratorSpec {
        &self.spec
    }

    pub fn dt(&self) -> f64 {
        self.spec.dt
    }

    /// One step with `u` held constant.
    pub fn step(
        &self,
        model: &dyn SemilinearModel,
        x: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let dt = self.spec.dt;
        let next = match self.spec.scheme {
            Scheme::SemiImplicitEuler => {
                let mut rhs = model.drift(x) + model.b_of_x(x) * u;
                if let Some(l) = &self.spec.implicit_part {
                    rhs -= l * x;
                }
                let explicit = x + rhs * dt;
                match &self.lu {
                    Some(lu) => lu.solve(&explicit).ok_or(Error::SingularImplicitOperator)?,
                    None => explicit,
                }
            }
            Scheme::Rk4 => {
                let f = |y: &DVector<f64>| model.drift(y) + model.b_of_x(y) * u;
                let k1 = f(x);
                let k2 = f(&(x + &k1 * (0.5 * dt)));
                let k3 = f(&(x + &k2 * (0.5 * dt)));
                let k4 = f(&(x + &k3 * dt));
                x + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0)
            }
        };
        if next.iter().all(|v| v.is_finite()) {
            Ok(next)
        } else {
            Err(Error::NonFiniteState)
        }
    }
}

/// One step of `model` under `integrator`.
pub fn step(
    model: &dyn SemilinearModel,
    integrator: &Integrator,
    x: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<DVector<f64>> {
    integrator.step(model, x, u)
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Evaluate `E` every `residual_stride` steps.
    pub residual: bool,
    pub residual_stride: usize,
    pub residual_form: ResidualForm,
    /// Apply `ũ_S` instead of the plain Riccati feedback.
    pub corrected: bool,
    pub divergence_threshold: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            residual: false,
            residual_stride: 1,
            residual_form: ResidualForm::ClosedLoop,
            corrected: false,
            divergence_threshold: 1e8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepStats {
    pub iterations: usize,
    pub lyap_solves: usize,
    pub residual_norm: f64,
    /// Seconds spent in the Riccati strategy for this step.
    pub wall_time: f64,
    pub fell_back: bool,
    pub certificate_holds: Option<bool>,
}

#[derive(Clone, Debug, Default)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub controls: Vec<DVector<f64>>,
    pub running_cost: Vec<f64>,
    pub residuals: Vec<Option<f64>>,
    /// `‖φ‖₂` wherever `φ` was computed.
    pub phi_norms: Vec<Option<f64>>,
    pub step_stats: Vec<StepStats>,
    pub total_cost: f64,
    pub wall_time_total: f64,
    pub diverged: bool,
    pub fallbacks: usize,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Steps that needed no Lyapunov solve.
    pub fn zero_solve_steps(&self) -> usize {
        self.step_stats.iter().filter(|s| s.lyap_solves == 0).count()
    }
}

/// Trapezoidal rule on a uniform grid.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    values.windows(2).map(|w| 0.5 * dt * (w[0] + w[1])).sum()
}

/// Trapezoidal quadrature of `yᵀQy + uᵀRu` over the recorded grid.
pub fn total_cost(record: &TrajectoryRecord, cost: &QuadraticCost) -> f64 {
    let ell: Vec<f64> = record
        .states
        .iter()
        .zip(&record.controls)
        .map(|(y, u)| cost.running(y, u))
        .collect();
    record
        .times
        .windows(2)
        .zip(ell.windows(2))
        .map(|(t, l)| 0.5 * (t[1] - t[0]) * (l[0] + l[1]))
        .sum()
}

/// Freeze the gain at `y(t_n)`, hold the control over `[t_n, t_{n+1}]`,
/// repeat. A state that leaves the divergence threshold truncates the run.
pub fn run_receding_horizon(
    model: &dyn SemilinearModel,
    cost: &QuadraticCost,
    strategy: &mut StrategyState,
    integrator: &Integrator,
    y0: &DVector<f64>,
    opts: &RunOptions,
) -> Result<TrajectoryRecord> {
    if y0.len() != model.dim_state() {
        return Err(Error::DimensionMismatch(format!(
            "initial state of length {} for dimension {}",
            y0.len(),
            model.dim_state()
        )));
    }
    let n_steps = integrator.spec().steps();
    let dt = integrator.dt();
    let stride = opts.residual_stride.max(1);
    let mut rec = TrajectoryRecord::default();
    let mut y = y0.clone();
    for n in 0..=n_steps {
        let clock = Instant::now();
        let gain = strategy.gain(model, cost, &y).map_err(|e| e.at_step(n))?;
        let wall_time = clock.elapsed().as_secs_f64();

        let want_e = opts.residual && n % stride == 0;
        let mut u = gain.u.clone();
        let mut e = None;
        let mut phi_norm = None;
        if want_e || opts.corrected {
            let phi = compute_phi(model, cost, &y, &gain.p).map_err(|e| e.at_step(n))?;
            phi_norm = Some(phi.norm());
            if opts.corrected {
                u = corrected_control(model, cost, &y, &gain.p, &phi)?;
            }
            if want_e {
                e = Some(hjb_residual(model, cost, &y, &gain.p, &phi, opts.residual_form)?);
            }
        }

        rec.times.push(n as f64 * dt);
        rec.running_cost.push(cost.running(&y, &u));
        rec.residuals.push(e);
        rec.phi_norms.push(phi_norm);
        rec.step_stats.push(StepStats {
            iterations: gain.iterations,
            lyap_solves: gain.lyap_solves,
            residual_norm: gain.residual_norm,
            wall_time,
            fell_back: gain.fell_back,
            certificate_holds: gain.certificate.map(|c| c.holds),
        });
        rec.wall_time_total += wall_time;
        rec.states.push(y.clone());
        rec.controls.push(u.clone());
        if n == n_steps {
            break;
        }
        match integrator.step(model, &y, &u) {
            Ok(next) if next.norm() <= opts.divergence_threshold => y = next,
            Ok(_) | Err(Error::NonFiniteState) => {
                rec.diverged = true;
                break;
            }
            Err(e) => return Err(e.at_step(n)),
        }
    }
    rec.total_cost = trapezoid(&rec.running_cost, dt);
    rec.fallbacks = strategy.fallbacks();
    Ok(rec)
}

/// Singular values, descending.
pub fn singular_value_profile(p: &DMatrix<f64>) -> Vec<f64> {
    crate::mateq::singular_values_desc(p)
}

/// Count of singular values above `rel · σ₁`.
pub fn numerical_rank(sv: &[f64], rel: f64) -> usize {
    let Some(&s1) = sv.first() else { return 0 };
    sv.iter().filter(|&&s| s > rel * s1).count()
}

/// `max_i |P[i, i+k]|` for each diagonal offset `k ≥ 0`.
pub fn offdiag_profile(p: &DMatrix<f64>) -> Vec<f64> {
    let n = p.nrows().min(p.ncols());
    (0..n)
        .map(|k| {
            (0..n - k)
                .map(|i| p[(i, i + k)].abs().max(p[(i + k, i)].abs()))
                .fold(0.0, f64::max)
        })
        .collect()
}
