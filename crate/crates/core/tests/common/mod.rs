#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use sdre::model::{DecompositionTerm, SemilinearModel, SparseMatrix, StructuredDecomposition};

/// `A(x) = diag(a_i + c x_i²)`, `B = I`.
pub struct DiagonalModel {
    pub a: Vec<f64>,
    pub c: f64,
    dec: StructuredDecomposition,
}

impl DiagonalModel {
    pub fn new(a: Vec<f64>, c: f64) -> Self {
        let d = a.len();
        let terms = (0..d)
            .map(|i| DecompositionTerm {
                f: Arc::new(move |x: &DVector<f64>| x[i] * x[i]),
                grad_f: Arc::new(move |x: &DVector<f64>| {
                    let mut g = DVector::zeros(x.len());
                    g[i] = 2.0 * x[i];
                    g
                }),
                a: SparseMatrix::single(d, d, i, i, c),
            })
            .collect();
        let dec = StructuredDecomposition {
            a0: DMatrix::from_diagonal(&DVector::from_vec(a.clone())),
            terms,
        };
        DiagonalModel { a, c, dec }
    }
}

impl SemilinearModel for DiagonalModel {
    fn name(&self) -> &str {
        "diagonal"
    }
    fn dim_state(&self) -> usize {
        self.a.len()
    }
    fn dim_control(&self) -> usize {
        self.a.len()
    }
    fn a_of_x(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.a.len(), self.a.len(), |i, j| {
            if i == j {
                self.a[i] + self.c * x[i] * x[i]
            } else {
                0.0
            }
        })
    }
    fn b_of_x(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(self.a.len(), self.a.len())
    }
    fn a_partial(&self, x: &DVector<f64>, i: usize) -> SparseMatrix {
        let d = self.a.len();
        SparseMatrix::single(d, d, i, i, 2.0 * self.c * x[i])
    }
    fn constant_b(&self) -> Option<DMatrix<f64>> {
        Some(DMatrix::identity(self.a.len(), self.a.len()))
    }
    fn decomposition(&self) -> Option<&StructuredDecomposition> {
        Some(&self.dec)
    }
}
