//! Real Schur factorization with eigenvalue reordering.
//!
//! `nalgebra` supplies the unordered factorization `A = Q T Qᵀ`. On top of it
//! this module standardizes the quasi-triangular factor (2×2 diagonal blocks
//! only for complex-conjugate pairs) and reorders blocks by swapping
//! adjacent pairs with orthogonal similarity transformations, so that a
//! selected group of eigenvalues occupies the leading diagonal blocks.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// nalgebra's QR iteration occasionally stalls (seen on Hamiltonian
/// matrices, whose spectrum is symmetric about the imaginary axis). On
/// failure retry on `U A Uᵀ` for a few fixed orthogonal `U` and map the
/// factor back.
fn unordered_schur(a: &DMatrix<f64>) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let max_niter = 500 * n.max(4);
    if let Some(s) = Schur::try_new(a.clone(), f64::EPSILON, max_niter) {
        return Some(s.unpack());
    }
    let reversal = DMatrix::from_fn(n, n, |i, j| if i + j == n - 1 { 1.0 } else { 0.0 });
    let cyclic = DMatrix::from_fn(n, n, |i, j| if (i + 1) % n == j { 1.0 } else { 0.0 });
    let v = DVector::from_fn(n, |i, _| 1.0 + 0.5 * ((i + 1) as f64).sqrt().sin());
    let householder = DMatrix::identity(n, n) - &v * v.transpose() * (2.0 / v.norm_squared());
    [reversal, cyclic, householder].into_iter().find_map(|u| {
        let (q, t) = Schur::try_new(&u * a * u.transpose(), f64::EPSILON, max_niter)?.unpack();
        Some((u.transpose() * q, t))
    })
}

#[derive(Clone, Debug)]
pub struct RealSchur {
    q: DMatrix<f64>,
    t: DMatrix<f64>,
    /// Diagonal block sizes (1 or 2) in order along the diagonal.
    blocks: Vec<usize>,
}

impl RealSchur {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "Schur factorization of a {}x{} matrix",
                n,
                a.ncols()
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::SchurFailed);
        }
        let (q, t) = if n == 0 {
            (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0))
        } else {
            unordered_schur(a).ok_or(Error::SchurFailed)?
        };
        let mut schur = RealSchur {
            q,
            t,
            blocks: Vec::new(),
        };
        schur.standardize();
        Ok(schur)
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn t(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn order(&self) -> usize {
        self.t.nrows()
    }

    /// `(offset, size)` of every diagonal block.
    pub fn block_ranges(&self) -> Vec<(usize, usize)> {
        let mut off = 0;
        self.blocks
            .iter()
            .map(|&s| {
                let r = (off, s);
                off += s;
                r
            })
            .collect()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.order());
        for (off, size) in self.block_ranges() {
            let (l1, l2) = self.block_eigenvalues(off, size);
            out.push(l1);
            if let Some(l2) = l2 {
                out.push(l2);
            }
        }
        out
    }

    /// Largest real part over the spectrum; `-inf` for an empty matrix.
    pub fn spectral_abscissa(&self) -> f64 {
        self.block_ranges()
            .into_iter()
            .map(|(off, size)| self.block_eigenvalues(off, size).0.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn block_eigenvalues(&self, off: usize, size: usize) -> (Complex64, Option<Complex64>) {
        let t = &self.t;
        if size == 1 {
            return (Complex64::new(t[(off, off)], 0.0), None);
        }
        let (a, b, c, d) = (
            t[(off, off)],
            t[(off, off + 1)],
            t[(off + 1, off)],
            t[(off + 1, off + 1)],
        );
        let mean = 0.5 * (a + d);
        let disc = 0.25 * (a - d) * (a - d) + b * c;
        if disc >= 0.0 {
            let r = disc.sqrt();
            (
                Complex64::new(mean + r, 0.0),
                Some(Complex64::new(mean - r, 0.0)),
            )
        } else {
            let im = (-disc).sqrt();
            (Complex64::new(mean, im), Some(Complex64::new(mean, -im)))
        }
    }

    /// Cleans the factor returned by the QR iteration: exact zeros below the
    /// first subdiagonal, negligible subdiagonals flushed, and 2×2 blocks
    /// with real eigenvalues split by a plane rotation.
    fn standardize(&mut self) {
        let n = self.order();
        for j in 0..n {
            for i in (j + 2)..n {
                self.t[(i, j)] = 0.0;
            }
        }
        self.blocks.clear();
        let mut i = 0;
        while i < n {
            if i + 1 < n {
                let scale = self.t[(i, i)].abs() + self.t[(i + 1, i + 1)].abs();
                if self.t[(i + 1, i)].abs() <= f64::EPSILON * scale {
                    self.t[(i + 1, i)] = 0.0;
                }
            }
            if i + 1 < n && self.t[(i + 1, i)] != 0.0 {
                if !self.split_real_pair(i) {
                    self.blocks.push(2);
                    i += 2;
                    continue;
                }
                self.blocks.push(1);
                self.blocks.push(1);
                i += 2;
            } else {
                self.blocks.push(1);
                i += 1;
            }
        }
    }

    /// Triangularizes the 2×2 block at `i` when its eigenvalues are real.
    /// Returns false (leaving the block untouched) for a complex pair.
    fn split_real_pair(&mut self, i: usize) -> bool {
        let (a, b, c, d) = (
            self.t[(i, i)],
            self.t[(i, i + 1)],
            self.t[(i + 1, i)],
            self.t[(i + 1, i + 1)],
        );
        let disc = 0.25 * (a - d) * (a - d) + b * c;
        if disc < 0.0 {
            return false;
        }
        let mean = 0.5 * (a + d);
        let r = disc.sqrt();
        let lambda = if mean >= 0.0 { mean + r } else { mean - r };
        // Eigenvector of [[a, b], [c, d]] for lambda; take the better-scaled form.
        let v1 = (b, lambda - a);
        let v2 = (lambda - d, c);
        let (x, y) = if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) {
            v1
        } else {
            v2
        };
        let nrm = x.hypot(y);
        if nrm == 0.0 {
            return false;
        }
        let (cs, sn) = (x / nrm, y / nrm);
        let g = DMatrix::from_row_slice(2, 2, &[cs, -sn, sn, cs]);
        self.apply_orthogonal(i, &g);
        self.t[(i + 1, i)] = 0.0;
        true
    }

    /// `T <- Gᵀ T G` and `Q <- Q G` for `G` acting on rows/columns `j..j+k`.
    fn apply_orthogonal(&mut self, j: usize, g: &DMatrix<f64>) {
        let k = g.nrows();
        let rows = self.t.rows(j, k).clone_owned();
        self.t.rows_mut(j, k).copy_from(&(g.transpose() * rows));
        let cols = self.t.columns(j, k).clone_owned();
        self.t.columns_mut(j, k).copy_from(&(cols * g));
        let qc = self.q.columns(j, k).clone_owned();
        self.q.columns_mut(j, k).copy_from(&(qc * g));
    }

    /// Swaps the adjacent diagonal blocks of sizes `p` (at `j`) and `q`
    /// (at `j + p`).
    fn swap_blocks(&mut self, j: usize, p: usize, q: usize) -> Result<()> {
        let t11 = self.t.view((j, j), (p, p)).clone_owned();
        let t12 = self.t.view((j, j + p), (p, q)).clone_owned();
        let t22 = self.t.view((j + p, j + p), (q, q)).clone_owned();

        // T11 X - X T22 = -T12, column-major vec(X).
        let m = p * q;
        let mut k = DMatrix::<f64>::zeros(m, m);
        let mut rhs = nalgebra::DVector::<f64>::zeros(m);
        for c in 0..q {
            for r in 0..p {
                let row = r + c * p;
                for s in 0..p {
                    k[(row, s + c * p)] += t11[(r, s)];
                }
                for s in 0..q {
                    k[(row, r + s * p)] -= t22[(s, c)];
                }
                rhs[row] = -t12[(r, c)];
            }
        }
        let x = k.full_piv_lu().solve(&rhs).ok_or(Error::SingularReduction)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularReduction);
        }

        let mut v = DMatrix::<f64>::zeros(p + q, q);
        for c in 0..q {
            for r in 0..p {
                v[(r, c)] = x[r + c * p];
            }
            v[(p + c, c)] = 1.0;
        }
        let qr = v.qr();
        let mut qt = DMatrix::<f64>::identity(p + q, p + q);
        qr.q_tr_mul(&mut qt);
        let g = qt.transpose();
        self.apply_orthogonal(j, &g);

        for c in j..j + q {
            for r in (j + q)..(j + p + q) {
                self.t[(r, c)] = 0.0;
            }
        }
        if q == 1 && p == 1 {
            return Ok(());
        }
        // A 2x2 block that moved may have picked up a tiny coupling to the
        // 1x1 neighbour inside the swapped window; clear the structural zeros.
        if q == 2 && p == 1 {
            self.t[(j + 2, j + 1)] = 0.0;
        }
        if q == 1 && p == 2 {
            self.t[(j + 1, j)] = 0.0;
        }
        Ok(())
    }

    /// Moves every diagonal block whose eigenvalue satisfies `select` to the
    /// top-left, preserving relative order. Returns the number of selected
    /// eigenvalues (counting multiplicity), i.e. the dimension of the
    /// associated invariant subspace spanned by the leading columns of `Q`.
    pub fn reorder<F>(&mut self, select: F) -> Result<usize>
    where
        F: Fn(Complex64) -> bool,
    {
        let mut placed = 0usize;
        for k in 0..self.blocks.len() {
            let off: usize = self.blocks[..k].iter().sum();
            let (lambda, _) = self.block_eigenvalues(off, self.blocks[k]);
            if !select(lambda) {
                continue;
            }
            let mut idx = k;
            while idx > placed {
                let off_prev: usize = self.blocks[..idx - 1].iter().sum();
                let (p, q) = (self.blocks[idx - 1], self.blocks[idx]);
                self.swap_blocks(off_prev, p, q)?;
                self.blocks.swap(idx - 1, idx);
                idx -= 1;
            }
            placed += 1;
        }
        Ok(self.blocks[..placed].iter().sum())
    }
}
