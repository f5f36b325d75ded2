//! Semilinear (state-dependent coefficient) representations `f(x) = A(x) x`.

mod builtin;
mod cost;
mod params;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use builtin::{
    builtin_model, grid_points, interval_indices, neumann_laplacian, AllenCahn, BuiltinSetup, Lqr,
    VanDerPol, Zeldovich, ZeldovichParams, BUILTIN_MODELS,
};
pub use cost::QuadraticCost;
pub use params::{InitialProfile, ModelParams, NeumannStencil, Quadrature, VdpForm};

/// Sparse matrix as a triplet list. Derivative maps of the builtins have
/// one or two nonzeros, so products against dense `P` stay `O(d²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn single(nrows: usize, ncols: usize, i: usize, j: usize, v: f64) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            entries: vec![(i, j, v)],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&(_, _, v)| v == 0.0)
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        self.entries.push((i, j, v));
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.entries.iter_mut().for_each(|e| e.2 *= c);
        self
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }

    /// `M · self` for dense `M`.
    pub fn left_mul(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(m.nrows(), self.ncols);
        for &(i, j, v) in &self.entries {
            let src = m.column(i);
            let mut dst = out.column_mut(j);
            dst.axpy(v, &src, 1.0);
        }
        out
    }

    /// `self · v`.
    pub fn mul_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.nrows);
        for &(i, j, a) in &self.entries {
            out[i] += a * v[j];
        }
        out
    }

    pub fn add_to(&self, m: &mut DMatrix<f64>, c: f64) {
        for &(i, j, v) in &self.entries {
            m[(i, j)] += c * v;
        }
    }
}

pub type ScalarField = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
pub type GradientField = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

#[derive(Clone)]
pub struct DecompositionTerm {
    pub f: ScalarField,
    pub grad_f: GradientField,
    pub a: SparseMatrix,
}

/// `A(x) = A₀ + Σ_j f_j(x) A_j`.
#[derive(Clone)]
pub struct StructuredDecomposition {
    pub a0: DMatrix<f64>,
    pub terms: Vec<DecompositionTerm>,
}

impl StructuredDecomposition {
    /// `Ã(x) = Σ_j f_j(x) A_j`.
    pub fn nonlinear(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.a0.nrows();
        let mut m = DMatrix::zeros(n, n);
        for term in &self.terms {
            let fx = (term.f)(x);
            if fx != 0.0 {
                term.a.add_to(&mut m, fx);
            }
        }
        m
    }

    pub fn eval(&self, x: &DVector<f64>) -> DMatrix<f64> {
        &self.a0 + self.nonlinear(x)
    }
}

impl std::fmt::Debug for StructuredDecomposition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StructuredDecomposition")
            .field("order", &self.a0.nrows())
            .field("terms", &self.terms.len())
            .finish()
    }
}

/// A control-affine system `ẋ = A(x) x + B(x) u`.
pub trait SemilinearModel: Send + Sync {
    fn name(&self) -> &str;
    fn dim_state(&self) -> usize;
    fn dim_control(&self) -> usize;
    fn a_of_x(&self, x: &DVector<f64>) -> DMatrix<f64>;
    fn b_of_x(&self, x: &DVector<f64>) -> DMatrix<f64>;
    /// `∂A/∂x_i` at `x`.
    fn a_partial(&self, x: &DVector<f64>, i: usize) -> SparseMatrix;

    /// `∂B/∂x_i` at `x`; zero unless overridden.
    fn b_partial(&self, _x: &DVector<f64>, _i: usize) -> SparseMatrix {
        SparseMatrix::zeros(self.dim_state(), self.dim_control())
    }

    /// The uncontrolled vector field. Builtins evaluate it independently of
    /// `A(x)` so that semilinear consistency is checkable.
    fn drift(&self, x: &DVector<f64>) -> DVector<f64> {
        self.a_of_x(x) * x
    }

    fn constant_b(&self) -> Option<DMatrix<f64>> {
        None
    }

    fn decomposition(&self) -> Option<&StructuredDecomposition> {
        None
    }

    /// Stiff linear operator to treat implicitly in time stepping.
    fn stiff_part(&self) -> Option<&DMatrix<f64>> {
        None
    }
}

fn check_state(model: &dyn SemilinearModel, x: &DVector<f64>) -> Result<()> {
    if x.len() != model.dim_state() {
        return Err(Error::DimensionMismatch(format!(
            "state of length {} for model `{}` of dimension {}",
            x.len(),
            model.name(),
            model.dim_state()
        )));
    }
    Ok(())
}

/// `(A(x), B(x))`.
pub fn eval_semilinear(
    model: &dyn SemilinearModel,
    x: &DVector<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_state(model, x)?;
    Ok((model.a_of_x(x), model.b_of_x(x)))
}

/// Perturbation with `Z(x)[i1, j1] = x[j2]`, `Z(x)[i1, j2] = −x[j1]`, so that
/// `Z(x) x = 0`. Indices are zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ZPerturbation {
    pub i1: usize,
    pub j1: usize,
    pub j2: usize,
}

impl ZPerturbation {
    pub fn new(i1: usize, j1: usize, j2: usize) -> Result<Self> {
        if j1 == j2 {
            return Err(Error::IndexOutOfRange(format!("j1 = j2 = {j1}")));
        }
        Ok(ZPerturbation { i1, j1, j2 })
    }

    /// From the one-based indices used in configuration files.
    pub fn from_one_based(i1: usize, j1: usize, j2: usize) -> Result<Self> {
        if i1 == 0 || j1 == 0 || j2 == 0 {
            return Err(Error::IndexOutOfRange(
                "one-based perturbation indices must be positive".into(),
            ));
        }
        Self::new(i1 - 1, j1 - 1, j2 - 1)
    }

    pub fn check(&self, d: usize) -> Result<()> {
        let max = self.i1.max(self.j1).max(self.j2);
        if max >= d {
            return Err(Error::IndexOutOfRange(format!(
                "perturbation index {max} for state dimension {d}"
            )));
        }
        if self.j1 == self.j2 {
            return Err(Error::IndexOutOfRange(format!("j1 = j2 = {}", self.j1)));
        }
        Ok(())
    }

    pub fn matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = x.len();
        let mut z = DMatrix::zeros(d, d);
        z[(self.i1, self.j1)] = x[self.j2];
        z[(self.i1, self.j2)] = -x[self.j1];
        z
    }

    /// `∂Z/∂x_k`, which does not depend on `x`.
    pub fn partial(&self, d: usize, k: usize) -> SparseMatrix {
        let mut s = SparseMatrix::zeros(d, d);
        if k == self.j2 {
            s.push(self.i1, self.j1, 1.0);
        }
        if k == self.j1 {
            s.push(self.i1, self.j2, -1.0);
        }
        s
    }
}

/// `A(x) + α Z(x)`, with drift and input map inherited from the base model.
pub struct PerturbedModel {
    base: Arc<dyn SemilinearModel>,
    z: ZPerturbation,
    alpha: f64,
    name: String,
    decomposition: Option<StructuredDecomposition>,
}

impl PerturbedModel {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn perturbation(&self) -> ZPerturbation {
        self.z
    }

    pub fn base(&self) -> &Arc<dyn SemilinearModel> {
        &self.base
    }
}

pub fn perturbed_model(
    model: Arc<dyn SemilinearModel>,
    z: ZPerturbation,
    alpha: f64,
) -> Result<PerturbedModel> {
    let d = model.dim_state();
    z.check(d)?;
    let decomposition = model.decomposition().cloned().map(|mut dec| {
        if alpha != 0.0 {
            let (j1, j2) = (z.j1, z.j2);
            dec.terms.push(DecompositionTerm {
                f: Arc::new(move |x: &DVector<f64>| alpha * x[j2]),
                grad_f: Arc::new(move |x: &DVector<f64>| {
                    let mut g = DVector::zeros(x.len());
                    g[j2] = alpha;
                    g
                }),
                a: SparseMatrix::single(d, d, z.i1, j1, 1.0),
            });
            dec.terms.push(DecompositionTerm {
                f: Arc::new(move |x: &DVector<f64>| -alpha * x[j1]),
                grad_f: Arc::new(move |x: &DVector<f64>| {
                    let mut g = DVector::zeros(x.len());
                    g[j1] = -alpha;
                    g
                }),
                a: SparseMatrix::single(d, d, z.i1, j2, 1.0),
            });
        }
        dec
    });
    let name = format!("{}+{}Z", model.name(), alpha);
    Ok(PerturbedModel {
        base: model,
        z,
        alpha,
        name,
        decomposition,
    })
}

impl SemilinearModel for PerturbedModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim_state(&self) -> usize {
        self.base.dim_state()
    }

    fn dim_control(&self) -> usize {
        self.base.dim_control()
    }

    fn a_of_x(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut a = self.base.a_of_x(x);
        if self.alpha != 0.0 {
            a[(self.z.i1, self.z.j1)] += self.alpha * x[self.z.j2];
            a[(self.z.i1, self.z.j2)] -= self.alpha * x[self.z.j1];
        }
        a
    }

    fn b_of_x(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.base.b_of_x(x)
    }

    fn a_partial(&self, x: &DVector<f64>, i: usize) -> SparseMatrix {
        let mut p = self.base.a_partial(x, i);
        if self.alpha != 0.0 {
            let dz = self.z.partial(self.dim_state(), i).scaled(self.alpha);
            p.entries.extend(dz.entries);
        }
        p
    }

    fn b_partial(&self, x: &DVector<f64>, i: usize) -> SparseMatrix {
        self.base.b_partial(x, i)
    }

    fn drift(&self, x: &DVector<f64>) -> DVector<f64> {
        self.base.drift(x)
    }

    fn constant_b(&self) -> Option<DMatrix<f64>> {
        self.base.constant_b()
    }

    fn decomposition(&self) -> Option<&StructuredDecomposition> {
        self.decomposition.as_ref()
    }

    fn stiff_part(&self) -> Option<&DMatrix<f64>> {
        self.base.stiff_part()
    }
}
