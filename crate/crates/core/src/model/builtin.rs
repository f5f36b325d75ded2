//! Benchmark models: LQR, Van der Pol, Allen-Cahn and Zeldovich.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::params::{InitialProfile, ModelParams, NeumannStencil, Quadrature, VdpForm};
use super::{DecompositionTerm, QuadraticCost, SemilinearModel, SparseMatrix, StructuredDecomposition};
use crate::error::{Error, Result};
use crate::sim::{IntegratorSpec, Scheme};

pub const BUILTIN_MODELS: &[&str] = &["lqr", "van_der_pol", "allen_cahn", "zeldovich"];

/// Everything needed to run a builtin experiment.
#[derive(Clone)]
pub struct BuiltinSetup {
    pub model: Arc<dyn SemilinearModel>,
    pub cost: QuadraticCost,
    pub x0: DVector<f64>,
    pub integrator: IntegratorSpec,
}

/// `d` uniformly spaced points on `[0, 1]`, endpoints included.
pub fn grid_points(d: usize) -> Vec<f64> {
    let h = 1.0 / (d - 1) as f64;
    (0..d).map(|i| i as f64 * h).collect()
}

/// Indices of grid points inside the closed interval `[lo, hi]`.
pub fn interval_indices(grid: &[f64], omega: [f64; 2]) -> Vec<usize> {
    const SLACK: f64 = 1e-12;
    grid.iter()
        .enumerate()
        .filter(|(_, &x)| x >= omega[0] - SLACK && x <= omega[1] + SLACK)
        .map(|(i, _)| i)
        .collect()
}

/// Second-order Neumann Laplacian on the uniform grid of `d` points.
/// Returns the matrix and the spacing `h`.
pub fn neumann_laplacian(d: usize, stencil: NeumannStencil) -> (DMatrix<f64>, f64) {
    let h = 1.0 / (d - 1) as f64;
    let inv_h2 = 1.0 / (h * h);
    let mut l = DMatrix::zeros(d, d);
    for i in 0..d {
        l[(i, i)] = -2.0 * inv_h2;
        if i > 0 {
            l[(i, i - 1)] = inv_h2;
        }
        if i + 1 < d {
            l[(i, i + 1)] = inv_h2;
        }
    }
    match stencil {
        NeumannStencil::Symmetric => {
            l[(0, 0)] = -inv_h2;
            l[(d - 1, d - 1)] = -inv_h2;
        }
        NeumannStencil::GhostPoint => {
            l[(0, 1)] = 2.0 * inv_h2;
            l[(d - 1, d - 2)] = 2.0 * inv_h2;
        }
    }
    (l, h)
}

fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if nr == 0 || nc == 0 || rows.iter().any(|r| r.len() != nc) {
        return Err(Error::InvalidParams(format!("{what} must be a nonempty rectangular array")));
    }
    Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

fn positive(v: f64, what: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParams(format!("{what} must be positive, got {v}")))
    }
}

fn reject_unused(params: &ModelParams, model: &str, allowed: &[&str]) -> Result<()> {
    let set = [
        ("d", params.d.is_some()),
        ("sigma", params.sigma.is_some()),
        ("gamma", params.gamma.is_some()),
        ("nu", params.nu.is_some()),
        ("mu", params.mu.is_some()),
        ("case", params.case.is_some()),
        ("omega_c", params.omega_c.is_some()),
        ("omega_o", params.omega_o.is_some()),
        ("init", params.init.is_some()),
        ("x0", params.x0.is_some()),
        ("form", params.form.is_some()),
        ("stencil", params.stencil.is_some()),
        ("quadrature", params.quadrature.is_some()),
        ("a", params.a.is_some()),
        ("b", params.b.is_some()),
        ("q", params.q.is_some()),
        ("r", params.r.is_some()),
    ];
    for (name, present) in set {
        if present && !allowed.contains(&name) {
            return Err(Error::InvalidParams(format!(
                "parameter `{name}` does not apply to model `{model}`"
            )));
        }
    }
    Ok(())
}

fn initial_state(params: &ModelParams, default: DVector<f64>) -> Result<DVector<f64>> {
    match &params.x0 {
        Some(v) if v.len() != default.len() => Err(Error::InvalidParams(format!(
            "x0 has length {}, model dimension is {}",
            v.len(),
            default.len()
        ))),
        Some(v) => Ok(DVector::from_vec(v.clone())),
        None => Ok(default),
    }
}

/// Builds a builtin model with its cost, initial state and default
/// integrator.
pub fn builtin_model(name: &str, params: &ModelParams) -> Result<BuiltinSetup> {
    match name {
        "lqr" => {
            reject_unused(params, name, &["a", "b", "q", "r", "x0"])?;
            let a = match &params.a {
                Some(rows) => matrix_from_rows(rows, "a")?,
                None => DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            };
            let d = a.nrows();
            if !a.is_square() {
                return Err(Error::InvalidParams("a must be square".into()));
            }
            let b = match &params.b {
                Some(rows) => matrix_from_rows(rows, "b")?,
                None if d == 2 => DMatrix::from_column_slice(2, 1, &[0.0, 1.0]),
                None => DMatrix::identity(d, d),
            };
            if b.nrows() != d {
                return Err(Error::InvalidParams(format!("b must have {d} rows")));
            }
            let q = match &params.q {
                Some(rows) => matrix_from_rows(rows, "q")?,
                None => DMatrix::identity(d, d),
            };
            let r = match &params.r {
                Some(rows) => matrix_from_rows(rows, "r")?,
                None => DMatrix::identity(b.ncols(), b.ncols()),
            };
            let mut x0 = DVector::zeros(d);
            x0[0] = 1.0;
            let x0 = initial_state(params, x0)?;
            let model = Lqr::new(a, b)?;
            let cost = QuadraticCost::for_model(q, r, &model)?;
            Ok(BuiltinSetup {
                model: Arc::new(model),
                cost,
                x0,
                integrator: IntegratorSpec::new(Scheme::Rk4, 1e-2, 10.0),
            })
        }
        "van_der_pol" => {
            reject_unused(params, name, &["form", "x0"])?;
            let model = VanDerPol::new(params.form.unwrap_or_default());
            let cost = model.cost();
            let x0 = initial_state(params, DVector::from_vec(vec![-0.5, 0.5]))?;
            Ok(BuiltinSetup {
                model: Arc::new(model),
                cost,
                x0,
                integrator: IntegratorSpec::new(Scheme::Rk4, 1e-2, 20.0),
            })
        }
        "allen_cahn" => {
            reject_unused(
                params,
                name,
                &["d", "sigma", "gamma", "init", "x0", "stencil", "quadrature"],
            )?;
            let model = AllenCahn::new(
                params.d.unwrap_or(100),
                params.sigma.unwrap_or(AllenCahn::DEFAULT_SIGMA),
                params.gamma.unwrap_or(0.1),
                params.stencil.unwrap_or_default(),
                params.quadrature.unwrap_or_default(),
            )?;
            let x0 = initial_state(params, model.profile(params.init.unwrap_or_default()))?;
            let cost = model.cost();
            let integrator = IntegratorSpec::new(Scheme::SemiImplicitEuler, 0.02, 4.0)
                .with_implicit_part(model.stiff_part().cloned());
            Ok(BuiltinSetup {
                model: Arc::new(model),
                cost,
                x0,
                integrator,
            })
        }
        "zeldovich" => {
            reject_unused(
                params,
                name,
                &[
                    "d", "sigma", "gamma", "nu", "mu", "case", "omega_c", "omega_o", "init", "x0",
                    "stencil", "quadrature",
                ],
            )?;
            let mut p = ZeldovichParams::case(params.case.unwrap_or(1))?;
            if let Some(d) = params.d {
                p.d = d;
            }
            if let Some(v) = params.sigma {
                p.sigma = v;
            }
            if let Some(v) = params.gamma {
                p.gamma = v;
            }
            if let Some(v) = params.nu {
                p.nu = v;
            }
            if let Some(v) = params.mu {
                p.mu = v;
            }
            if let Some(v) = params.omega_c {
                p.omega_c = v;
            }
            if let Some(v) = params.omega_o {
                p.omega_o = v;
            }
            if let Some(v) = params.stencil {
                p.stencil = v;
            }
            if let Some(v) = params.quadrature {
                p.quadrature = v;
            }
            let model = Zeldovich::new(p)?;
            let x0 = initial_state(params, model.profile(params.init.unwrap_or_default()))?;
            let cost = model.cost();
            let integrator = IntegratorSpec::new(Scheme::SemiImplicitEuler, 0.02, 4.0)
                .with_implicit_part(model.stiff_part().cloned());
            Ok(BuiltinSetup {
                model: Arc::new(model),
                cost,
                x0,
                integrator,
            })
        }
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

/// Constant `ẋ = A x + B u`.
#[derive(Clone, Debug)]
pub struct Lqr {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    decomposition: StructuredDecomposition,
}

impl Lqr {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() || b.nrows() != a.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{}, B is {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        let decomposition = StructuredDecomposition {
            a0: a.clone(),
            terms: Vec::new(),
        };
        Ok(Lqr { a, b, decomposition })
    }
}

impl SemilinearModel for Lqr {
    fn name(&self) -> &str {
        "lqr"
    }
    fn dim_state(&self) -> usize {
        self.a.nrows()
    }
    fn dim_control(&self) -> usize {
        self.b.ncols()
    }
    fn a_of_x(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.a.clone()
    }
    fn b_of_x(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.b.clone()
    }
    fn a_partial(&self, _x: &DVector<f64>, _i: usize) -> SparseMatrix {
        SparseMatrix::zeros(self.a.nrows(), self.a.nrows())
    }
    fn constant_b(&self) -> Option<DMatrix<f64>> {
        Some(self.b.clone())
    }
    fn decomposition(&self) -> Option<&StructuredDecomposition> {
        Some(&self.decomposition)
    }
}

/// `ẋ₁ = x₂`, `ẋ₂ = −x₁ − ½(1 − x₁²) x₂ + x₁ u`.
#[derive(Clone, Debug)]
pub struct VanDerPol {
    form: VdpForm,
    decomposition: StructuredDecomposition,
}

impl VanDerPol {
    pub fn new(form: VdpForm) -> Self {
        let a0 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -0.5]);
        let mut terms = vec![DecompositionTerm {
            f: Arc::new(|x: &DVector<f64>| x[0] * x[0]),
            grad_f: Arc::new(|x: &DVector<f64>| DVector::from_vec(vec![2.0 * x[0], 0.0])),
            a: SparseMatrix::single(2, 2, 1, 1, 0.5),
        }];
        if form == VdpForm::Alternative {
            terms.push(DecompositionTerm {
                f: Arc::new(|x: &DVector<f64>| -x[1]),
                grad_f: Arc::new(|_: &DVector<f64>| DVector::from_vec(vec![0.0, -1.0])),
                a: SparseMatrix::single(2, 2, 0, 0, 1.0),
            });
            terms.push(DecompositionTerm {
                f: Arc::new(|x: &DVector<f64>| x[0]),
                grad_f: Arc::new(|_: &DVector<f64>| DVector::from_vec(vec![1.0, 0.0])),
                a: SparseMatrix::single(2, 2, 0, 1, 1.0),
            });
        }
        VanDerPol {
            form,
            decomposition: StructuredDecomposition { a0, terms },
        }
    }

    pub fn form(&self) -> VdpForm {
        self.form
    }

    /// `Q = diag(0, 1)`, `R = 1`.
    pub fn cost(&self) -> QuadraticCost {
        QuadraticCost::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]),
            DMatrix::identity(1, 1),
        )
        .expect("constant weights are valid")
    }
}

impl SemilinearModel for VanDerPol {
    fn name(&self) -> &str {
        "van_der_pol"
    }
    fn dim_state(&self) -> usize {
        2
    }
    fn dim_control(&self) -> usize {
        1
    }
    fn a_of_x(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let damp = -0.5 * (1.0 - x[0] * x[0]);
        match self.form {
            VdpForm::Baseline => DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, damp]),
            VdpForm::Alternative => {
                DMatrix::from_row_slice(2, 2, &[-x[1], 1.0 + x[0], -1.0, damp])
            }
        }
    }
    fn b_of_x(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_column_slice(2, 1, &[0.0, x[0]])
    }
    fn a_partial(&self, x: &DVector<f64>, i: usize) -> SparseMatrix {
        let mut s = SparseMatrix::zeros(2, 2);
        match (self.form, i) {
            (_, 0) => {
                s.push(1, 1, x[0]);
                if self.form == VdpForm::Alternative {
                    s.push(0, 1, 1.0);
                }
            }
            (VdpForm::Alternative, 1) => s.push(0, 0, -1.0),
            _ => {}
        }
        s
    }
    fn b_partial(&self, _x: &DVector<f64>, i: usize) -> SparseMatrix {
        if i == 0 {
            SparseMatrix::single(2, 1, 1, 0, 1.0)
        } else {
            SparseMatrix::zeros(2, 1)
        }
    }
    fn drift(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(vec![x[1], -x[0] - 0.5 * (1.0 - x[0] * x[0]) * x[1]])
    }
    fn decomposition(&self) -> Option<&StructuredDecomposition> {
        Some(&self.decomposition)
    }
}

/// Diagonal reaction terms `Σ_j g(y_j) e_j e_jᵀ` as a decomposition.
fn diagonal_terms(
    d: usize,
    g: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    dg: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
) -> Vec<DecompositionTerm> {
    (0..d)
        .map(|j| {
            let g = g.clone();
            let dg = dg.clone();
            DecompositionTerm {
                f: Arc::new(move |x: &DVector<f64>| g(x[j])),
                grad_f: Arc::new(move |x: &DVector<f64>| {
                    let mut v = DVector::zeros(x.len());
                    v[j] = dg(x[j]);
                    v
                }),
                a: SparseMatrix::single(d, d, j, j, 1.0),
            }
        })
        .collect()
}

fn quadrature_weight(q: Quadrature, h: f64) -> f64 {
    match q {
        Quadrature::Grid => h,
        Quadrature::Unit => 1.0,
    }
}

/// Discretized `y_t = σ y_xx + y − y³ + u` with homogeneous Neumann
/// conditions and distributed control.
#[derive(Clone, Debug)]
pub struct AllenCahn {
    sigma: f64,
    gamma: f64,
    h: f64,
    quadrature: Quadrature,
    diffusion: DMatrix<f64>,
    decomposition: StructuredDecomposition,
}

impl AllenCahn {
    /// `σ = 10^{-q}` with `q = 1`.
    pub const DEFAULT_SIGMA: f64 = 0.1;

    pub fn new(
        d: usize,
        sigma: f64,
        gamma: f64,
        stencil: NeumannStencil,
        quadrature: Quadrature,
    ) -> Result<Self> {
        if d < 3 {
            return Err(Error::InvalidParams(format!("grid needs at least 3 points, got {d}")));
        }
        positive(sigma, "sigma")?;
        positive(gamma, "gamma")?;
        let (lap, h) = neumann_laplacian(d, stencil);
        let diffusion = lap * sigma;
        let a0 = &diffusion + DMatrix::identity(d, d);
        let terms = diagonal_terms(d, |y| -y * y, |y| -2.0 * y);
        Ok(AllenCahn {
            sigma,
            gamma,
            h,
            quadrature,
            diffusion,
            decomposition: StructuredDecomposition { a0, terms },
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn profile(&self, init: InitialProfile) -> DVector<f64> {
        let g = grid_points(self.dim_state());
        DVector::from_iterator(g.len(), g.iter().map(|&x| init.eval(x)))
    }

    /// `Q = w·I`, `R = γ̃·w·I` with quadrature weight `w`.
    pub fn cost(&self) -> QuadraticCost {
        let d = self.dim_state();
        let w = quadrature_weight(self.quadrature, self.h);
        QuadraticCost::for_model(
            DMatrix::identity(d, d) * w,
            DMatrix::identity(d, d) * (self.gamma * w),
            self,
        )
        .expect("weights are positive definite")
    }
}

impl SemilinearModel for AllenCahn {
    fn name(&self) -> &str {
        "allen_cahn"
    }
    fn dim_state(&self) -> usize {
        self.diffusion.nrows()
    }
    fn dim_control(&self) -> usize {
        self.diffusion.nrows()
    }
    fn a_of_x(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut a = self.decomposition.a0.clone();
        for i in 0..x.len() {
            a[(i, i)] -= x[i] * x[i];
        }
        a
    }
    fn b_of_x(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(self.dim_state(), self.dim_state())
    }
    fn a_partial(&self, x: &DVector<f64>, i: usize) -> SparseMatrix {
        let d = self.dim_state();
        SparseMatrix::single(d, d, i, i, -2.0 * x[i])
    }
    fn drift(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.diffusion * x + x.map(|y| y - y * y * y)
    }
    fn constant_b(&self) -> Option<DMatrix<f64>> {
        Some(self.b_of_x(&DVector::zeros(0)))
    }
    fn decomposition(&self) -> Option<&StructuredDecomposition> {
        Some(&self.decomposition)
    }
    fn stiff_part(&self) -> Option<&DMatrix<f64>> {
        Some(&self.diffusion)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeldovichParams {
    pub d: usize,
    pub sigma: f64,
    pub gamma: f64,
    pub nu: f64,
    pub mu: f64,
    pub omega_c: [f64; 2],
    pub omega_o: [f64; 2],
    pub stencil: NeumannStencil,
    pub quadrature: Quadrature,
}

impl ZeldovichParams {
    /// Case 1: partial control on `[0.2, 0.5]`, observation on `[0.5, 0.7]`.
    /// Case 2: full-domain control and observation.
    pub fn case(case: u8) -> Result<Self> {
        let base = ZeldovichParams {
            d: 100,
            sigma: 0.2,
            gamma: 0.01,
            nu: 0.5,
            mu: 1.0,
            omega_c: [0.2, 0.5],
            omega_o: [0.5, 0.7],
            stencil: NeumannStencil::default(),
            quadrature: Quadrature::default(),
        };
        match case {
            1 => Ok(base),
            2 => Ok(ZeldovichParams {
                sigma: 1e-2,
                gamma: 0.1,
                omega_c: [0.0, 1.0],
                omega_o: [0.0, 1.0],
                ..base
            }),
            other => Err(Error::InvalidParams(format!("zeldovich case must be 1 or 2, got {other}"))),
        }
    }
}

/// Discretized `y_t = σ y_xx + ν y + μ y²(1 − y) + χ_{ω_c} u` with
/// homogeneous Neumann conditions, cost observed on `ω_o`.
#[derive(Clone, Debug)]
pub struct Zeldovich {
    params: ZeldovichParams,
    h: f64,
    control_idx: Vec<usize>,
    observe_idx: Vec<usize>,
    b: DMatrix<f64>,
    diffusion: DMatrix<f64>,
    decomposition: StructuredDecomposition,
}

impl Zeldovich {
    pub fn new(params: ZeldovichParams) -> Result<Self> {
        let d = params.d;
        if d < 3 {
            return Err(Error::InvalidParams(format!("grid needs at least 3 points, got {d}")));
        }
        positive(params.sigma, "sigma")?;
        positive(params.gamma, "gamma")?;
        for (name, v) in [("nu", params.nu), ("mu", params.mu)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        for (name, w) in [("omega_c", params.omega_c), ("omega_o", params.omega_o)] {
            if !(0.0 <= w[0] && w[0] <= w[1] && w[1] <= 1.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} = [{}, {}] is not a subinterval of [0, 1]",
                    w[0], w[1]
                )));
            }
        }
        let grid = grid_points(d);
        let control_idx = interval_indices(&grid, params.omega_c);
        let observe_idx = interval_indices(&grid, params.omega_o);
        if control_idx.is_empty() {
            return Err(Error::InvalidParams("omega_c contains no grid point".into()));
        }
        let mut b = DMatrix::zeros(d, control_idx.len());
        for (k, &i) in control_idx.iter().enumerate() {
            b[(i, k)] = 1.0;
        }
        let (lap, h) = neumann_laplacian(d, params.stencil);
        let diffusion = lap * params.sigma;
        let a0 = &diffusion + DMatrix::identity(d, d) * params.nu;
        let mu = params.mu;
        let terms = diagonal_terms(d, move |y| mu * (y - y * y), move |y| mu * (1.0 - 2.0 * y));
        Ok(Zeldovich {
            params,
            h,
            control_idx,
            observe_idx,
            b,
            diffusion,
            decomposition: StructuredDecomposition { a0, terms },
        })
    }

    pub fn params(&self) -> &ZeldovichParams {
        &self.params
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn control_indices(&self) -> &[usize] {
        &self.control_idx
    }

    pub fn observe_indices(&self) -> &[usize] {
        &self.observe_idx
    }

    pub fn profile(&self, init: InitialProfile) -> DVector<f64> {
        let g = grid_points(self.params.d);
        DVector::from_iterator(g.len(), g.iter().map(|&x| init.eval(x)))
    }

    /// `Q = w·diag(χ_{ω_o})`, `R = γ̃·w·I_m` with quadrature weight `w`.
    pub fn cost(&self) -> QuadraticCost {
        let d = self.params.d;
        let m = self.control_idx.len();
        let w = quadrature_weight(self.params.quadrature, self.h);
        let mut q = DMatrix::zeros(d, d);
        for &i in &self.observe_idx {
            q[(i, i)] = w;
        }
        QuadraticCost::for_model(q, DMatrix::identity(m, m) * (self.params.gamma * w), self)
            .expect("weights are positive semidefinite")
    }
}

impl SemilinearModel for Zeldovich {
    fn name(&self) -> &str {
        "zeldovich"
    }
    fn dim_state(&self) -> usize {
        self.params.d
    }
    fn dim_control(&self) -> usize {
        self.control_idx.len()
    }
    fn a_of_x(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut a = self.decomposition.a0.clone();
        for i in 0..x.len() {
            a[(i, i)] += self.params.mu * (x[i] - x[i] * x[i]);
        }
        a
    }
    fn b_of_x(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.b.clone()
    }
    fn a_partial(&self, x: &DVector<f64>, i: usize) -> SparseMatrix {
        let d = self.params.d;
        SparseMatrix::single(d, d, i, i, self.params.mu * (1.0 - 2.0 * x[i]))
    }
    fn drift(&self, x: &DVector<f64>) -> DVector<f64> {
        let (nu, mu) = (self.params.nu, self.params.mu);
        &self.diffusion * x + x.map(|y| nu * y + mu * y * y * (1.0 - y))
    }
    fn constant_b(&self) -> Option<DMatrix<f64>> {
        Some(self.b.clone())
    }
    fn decomposition(&self) -> Option<&StructuredDecomposition> {
        Some(&self.decomposition)
    }
    fn stiff_part(&self) -> Option<&DMatrix<f64>> {
        Some(&self.diffusion)
    }
}
