//! Riccati gain strategies for the receding-horizon loop.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mateq::{
    eigenvalues, nk_iterate, norm2, riccati_residual_matrix, solve_care_s, spectral_info,
    LyapunovSolver, SpectralInfo, DEFAULT_NK_MAX_ITER, DEFAULT_NK_TOL,
};
use crate::model::{eval_semilinear, QuadraticCost, SemilinearModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Direct,
    OfflineOnline,
    CascadeNk,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [
        StrategyKind::OfflineOnline,
        StrategyKind::CascadeNk,
        StrategyKind::Direct,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Direct => "direct",
            StrategyKind::OfflineOnline => "offline_online",
            StrategyKind::CascadeNk => "cascade_nk",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "direct" => Ok(StrategyKind::Direct),
            "offline_online" => Ok(StrategyKind::OfflineOnline),
            "cascade_nk" | "cnk" => Ok(StrategyKind::CascadeNk),
            other => Err(format!(
                "unknown strategy `{other}` (expected direct, offline_online or cascade_nk)"
            )),
        }
    }
}

/// Sufficient condition for `A(x) − S(P₀ + W(x))` to be Hurwitz:
/// `‖Ã‖₂ (1 + ‖S‖₂ M² ‖P₀‖₂ / α) < α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StabilityCertificate {
    pub lhs: f64,
    pub alpha: f64,
    pub holds: bool,
}

impl StabilityCertificate {
    pub fn evaluate(a_tilde_norm: f64, s_norm: f64, p0_norm: f64, info: &SpectralInfo) -> Self {
        let m2 = info.cond_eigvec * info.cond_eigvec;
        let lhs = a_tilde_norm * (1.0 + s_norm * m2 * p0_norm / info.alpha);
        StabilityCertificate {
            lhs,
            alpha: info.alpha,
            holds: lhs < info.alpha,
        }
    }
}

/// Riccati matrix and control at one state, with solver statistics.
#[derive(Clone, Debug)]
pub struct Gain {
    pub p: DMatrix<f64>,
    pub u: DVector<f64>,
    /// Newton–Kleinman iterations (or refinement steps for the direct solve).
    pub iterations: usize,
    pub lyap_solves: usize,
    /// Riccati residual `‖𝓡(P)‖_F` at this state.
    pub residual_norm: f64,
    pub certificate: Option<StabilityCertificate>,
    /// The warm start was rejected and a direct solve was used instead.
    pub fell_back: bool,
}

/// Per-step direct CARE solve.
pub fn gain_direct(model: &dyn SemilinearModel, cost: &QuadraticCost, x: &DVector<f64>) -> Result<Gain> {
    let (a, b) = eval_semilinear(model, x)?;
    let s = cost.s_at(model, x);
    let sol = solve_care_s(&a, &s, cost.q())?;
    let u = cost.feedback(&b, &sol.p, x);
    Ok(Gain {
        u,
        iterations: sol.iterations,
        lyap_solves: sol.iterations,
        residual_norm: sol.residual_norm,
        p: sol.p,
        certificate: None,
        fell_back: false,
    })
}

/// Offline quantities of the offline–online method.
#[derive(Clone, Debug)]
pub struct OfflineData {
    pub a0: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub p0: DMatrix<f64>,
    /// `C₀ = A₀ − S P₀`.
    pub c0: DMatrix<f64>,
    pub info: SpectralInfo,
    s_norm: f64,
    p0_norm: f64,
    /// Schur factorization of `C₀`, shared by every online step.
    lyap: LyapunovSolver,
}

/// CARE for the linear part `A₀` and the spectral data of `C₀`.
pub fn offline_phase(model: &dyn SemilinearModel, cost: &QuadraticCost) -> Result<OfflineData> {
    let b = model.constant_b().ok_or(Error::StateDependentInput)?;
    let dec = model.decomposition().ok_or(Error::MissingDecomposition)?;
    let a0 = dec.a0.clone();
    let s = cost.input_weight(&b);
    let p0 = solve_care_s(&a0, &s, cost.q())?.p;
    let c0 = &a0 - &s * &p0;
    let lyap = LyapunovSolver::new(&c0)?;
    let info = match spectral_info(&c0) {
        Ok(info) => info,
        Err(Error::NearDefective { cond }) => {
            log::warn!("C0 is nearly defective (cond {cond:e}); the certificate will not hold");
            let alpha = eigenvalues(&c0)?
                .iter()
                .map(|l| l.re.abs())
                .fold(f64::INFINITY, f64::min);
            SpectralInfo {
                alpha,
                cond_eigvec: cond,
            }
        }
        Err(e) => return Err(e),
    };
    Ok(OfflineData {
        s_norm: norm2(&s),
        p0_norm: norm2(&p0),
        a0,
        b,
        s,
        p0,
        c0,
        info,
        lyap,
    })
}

/// `P₀ + W(x)` with `C₀ᵀW + WC₀ + P₀Ã + ÃᵀP₀ = 0`. The certificate is
/// evaluated and returned; it never blocks the step.
pub fn gain_offline_online(
    off: &OfflineData,
    model: &dyn SemilinearModel,
    cost: &QuadraticCost,
    x: &DVector<f64>,
) -> Result<Gain> {
    let (a, _) = eval_semilinear(model, x)?;
    let a_tilde = &a - &off.a0;
    let pa = &off.p0 * &a_tilde;
    let w = off.lyap.solve(&(pa.transpose() + pa))?;
    let p = &off.p0 + w;
    let u = cost.feedback(&off.b, &p, x);
    let certificate =
        StabilityCertificate::evaluate(norm2(&a_tilde), off.s_norm, off.p0_norm, &off.info);
    let residual_norm = riccati_residual_matrix(&a, &off.s, cost.q(), &p).norm();
    Ok(Gain {
        p,
        u,
        iterations: 0,
        lyap_solves: 1,
        residual_norm,
        certificate: Some(certificate),
        fell_back: false,
    })
}

/// Mutable per-trajectory state of a strategy.
#[derive(Clone, Debug)]
pub struct StrategyState {
    kind: StrategyKind,
    p_current: Option<DMatrix<f64>>,
    offline: Option<OfflineData>,
    pub nk_tol: f64,
    pub nk_max_iter: usize,
    fallbacks: usize,
    certificate_failures: usize,
}

impl StrategyState {
    /// Runs the offline phase for [`StrategyKind::OfflineOnline`].
    pub fn new(kind: StrategyKind, model: &dyn SemilinearModel, cost: &QuadraticCost) -> Result<Self> {
        let offline = match kind {
            StrategyKind::OfflineOnline => Some(offline_phase(model, cost)?),
            _ => None,
        };
        Ok(StrategyState {
            kind,
            p_current: None,
            offline,
            nk_tol: DEFAULT_NK_TOL,
            nk_max_iter: DEFAULT_NK_MAX_ITER,
            fallbacks: 0,
            certificate_failures: 0,
        })
    }

    pub fn with_nk(mut self, tol: f64, max_iter: usize) -> Self {
        self.nk_tol = tol;
        self.nk_max_iter = max_iter;
        self
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn p_current(&self) -> Option<&DMatrix<f64>> {
        self.p_current.as_ref()
    }

    pub fn offline(&self) -> Option<&OfflineData> {
        self.offline.as_ref()
    }

    /// Direct solves substituted for a rejected warm start.
    pub fn fallbacks(&self) -> usize {
        self.fallbacks
    }

    pub fn certificate_failures(&self) -> usize {
        self.certificate_failures
    }

    pub fn gain(
        &mut self,
        model: &dyn SemilinearModel,
        cost: &QuadraticCost,
        x: &DVector<f64>,
    ) -> Result<Gain> {
        let gain = match self.kind {
            StrategyKind::Direct => gain_direct(model, cost, x)?,
            StrategyKind::OfflineOnline => {
                let off = self.offline.as_ref().expect("offline phase ran in new()");
                let g = gain_offline_online(off, model, cost, x)?;
                if g.certificate.is_some_and(|c| !c.holds) {
                    self.certificate_failures += 1;
                }
                g
            }
            StrategyKind::CascadeNk => return gain_cascade_nk(self, model, cost, x),
        };
        self.p_current = Some(gain.p.clone());
        Ok(gain)
    }
}

/// Newton–Kleinman warm-started from the previous solution. The first call
/// is seeded by a direct solve; a rejected warm start falls back to one.
pub fn gain_cascade_nk(
    state: &mut StrategyState,
    model: &dyn SemilinearModel,
    cost: &QuadraticCost,
    x: &DVector<f64>,
) -> Result<Gain> {
    let Some(p_prev) = state.p_current.as_ref() else {
        let g = gain_direct(model, cost, x)?;
        state.p_current = Some(g.p.clone());
        return Ok(g);
    };
    let (a, b) = eval_semilinear(model, x)?;
    let s = cost.s_at(model, x);
    let gain = match nk_iterate(&a, &s, cost.q(), p_prev, state.nk_tol, state.nk_max_iter) {
        Ok(out) => Gain {
            u: cost.feedback(&b, &out.p, x),
            iterations: out.iterations,
            lyap_solves: out.iterations,
            residual_norm: out.residual_norm,
            p: out.p,
            certificate: None,
            fell_back: false,
        },
        Err(
            e @ (Error::NotStabilizingGuess { .. }
            | Error::MaxIterations { .. }
            | Error::NotHurwitz { .. }
            | Error::NoStabilizingSolution(_)),
        ) => {
            log::warn!("warm start rejected ({e}); falling back to a direct solve");
            state.fallbacks += 1;
            let mut g = gain_direct(model, cost, x)?;
            g.fell_back = true;
            g
        }
        Err(e) => return Err(e),
    };
    state.p_current = Some(gain.p.clone());
    Ok(gain)
}
