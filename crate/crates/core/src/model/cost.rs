use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::SemilinearModel;
use crate::error::{Error, Result};
use crate::mateq::symmetrize;

/// Running cost `xᵀQx + uᵀRu`.
#[derive(Clone, Debug)]
pub struct QuadraticCost {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    r_chol: Cholesky<f64, Dyn>,
    /// `B R⁻¹ Bᵀ` for models whose input matrix is constant.
    s_cache: Option<DMatrix<f64>>,
}

impl QuadraticCost {
    pub fn new(q: DMatrix<f64>, r: DMatrix<f64>) -> Result<Self> {
        if !q.is_square() || !r.is_square() {
            return Err(Error::DimensionMismatch("Q and R must be square".into()));
        }
        let qn = q.norm().max(1.0);
        if (&q - q.transpose()).norm() > 1e-12 * qn {
            return Err(Error::InvalidParams("Q is not symmetric".into()));
        }
        if q.nrows() > 0 {
            let min_eig = symmetrize(&q).symmetric_eigenvalues().min();
            if min_eig < -1e-12 * qn {
                return Err(Error::NotPositiveDefinite(format!(
                    "state weight Q has eigenvalue {min_eig:e}"
                )));
            }
        }
        if (&r - r.transpose()).norm() > 1e-12 * r.norm().max(1.0) {
            return Err(Error::InvalidParams("R is not symmetric".into()));
        }
        let r_chol = symmetrize(&r)
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("control weight R".into()))?;
        Ok(QuadraticCost {
            q,
            r,
            r_chol,
            s_cache: None,
        })
    }

    /// Like [`QuadraticCost::new`], caching `S` when the model's input matrix
    /// is constant.
    pub fn for_model(q: DMatrix<f64>, r: DMatrix<f64>, model: &dyn SemilinearModel) -> Result<Self> {
        let d = model.dim_state();
        let m = model.dim_control();
        if q.nrows() != d || r.nrows() != m {
            return Err(Error::DimensionMismatch(format!(
                "Q is {}x{}, R is {}x{} for a model with d = {d}, m = {m}",
                q.nrows(),
                q.ncols(),
                r.nrows(),
                r.ncols()
            )));
        }
        let mut cost = Self::new(q, r)?;
        if let Some(b) = model.constant_b() {
            cost.s_cache = Some(cost.input_weight(&b));
        }
        Ok(cost)
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    /// `R⁻¹ M`.
    pub fn r_solve(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.r_chol.solve(m)
    }

    pub fn r_solve_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        self.r_chol.solve(v)
    }

    /// `B R⁻¹ Bᵀ`.
    pub fn input_weight(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        symmetrize(&(b * self.r_solve(&b.transpose())))
    }

    /// `S(x)`; served from the cache when the input matrix is constant.
    pub fn s_at(&self, model: &dyn SemilinearModel, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.s_cache {
            Some(s) => s.clone(),
            None => self.input_weight(&model.b_of_x(x)),
        }
    }

    pub fn cached_s(&self) -> Option<&DMatrix<f64>> {
        self.s_cache.as_ref()
    }

    pub fn running(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        (x.transpose() * &self.q * x)[0] + (u.transpose() * &self.r * u)[0]
    }

    /// `−R⁻¹ Bᵀ P x`.
    pub fn feedback(&self, b: &DMatrix<f64>, p: &DMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
        -self.r_solve_vec(&(b.transpose() * (p * x)))
    }
}
