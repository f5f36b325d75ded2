//! Bartels–Stewart solver for `Aᵀ X + X A + Q = 0`.

use nalgebra::DMatrix;

use super::schur::RealSchur;
use super::symmetrize;
use crate::error::{Error, Result};

/// Relative substitution-residual target for returned solutions.
pub const LYAPUNOV_REL_TOL: f64 = 1e-10;

/// A Lyapunov operator `X ↦ AᵀX + XA` with the Schur factorization of `A`
/// computed once, so that many right-hand sides share one factorization.
#[derive(Clone, Debug)]
pub struct LyapunovSolver {
    a: DMatrix<f64>,
    schur: RealSchur,
    blocks: Vec<(usize, usize)>,
}

impl LyapunovSolver {
    /// Factors `a`; fails with `NotHurwitz` if any eigenvalue has nonnegative
    /// real part.
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let schur = RealSchur::new(a)?;
        let abscissa = schur.spectral_abscissa();
        if abscissa >= 0.0 {
            return Err(Error::NotHurwitz { abscissa });
        }
        let blocks = schur.block_ranges();
        Ok(LyapunovSolver {
            a: a.clone(),
            schur,
            blocks,
        })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn spectral_abscissa(&self) -> f64 {
        self.schur.spectral_abscissa()
    }

    /// Solves `AᵀX + XA + Q = 0` for symmetric `q`. One refinement sweep is
    /// applied if the first solve misses the residual target.
    pub fn solve(&self, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.order();
        if q.nrows() != n || q.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "Lyapunov right-hand side {}x{} for operator of order {}",
                q.nrows(),
                q.ncols(),
                n
            )));
        }
        let q = symmetrize(q);
        let mut x = self.solve_once(&q)?;
        let tol = LYAPUNOV_REL_TOL * q.norm().max(1.0);
        let r = self.residual(&x, &q);
        if r.norm() > tol {
            let dx = self.solve_once(&r)?;
            x += dx;
            x = symmetrize(&x);
        }
        Ok(x)
    }

    /// `AᵀX + XA + Q`.
    pub fn residual(&self, x: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
        let ax = x * &self.a;
        symmetrize(&(ax.transpose() + ax + q))
    }

    fn solve_once(&self, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let u = self.schur.q();
        let c = -(u.transpose() * q * u);
        let y = solve_quasi_triangular(self.schur.t(), &self.blocks, &c)?;
        Ok(symmetrize(&(u * y * u.transpose())))
    }
}

/// Solves `Aᵀ X + X A + Q = 0` with a fresh factorization of `a`.
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch("Lyapunov coefficient must be square".into()));
    }
    LyapunovSolver::new(a)?.solve(q)
}

/// Solves `Tᵀ Y + Y T = C` for quasi-upper-triangular `T` and symmetric `C`.
///
/// Block column `l` depends on columns `< l` through `Y T`; within a column,
/// row block `k` depends on rows `< k` through `Tᵀ Y`. Symmetry of `Y`
/// supplies the blocks above the diagonal.
fn solve_quasi_triangular(
    t: &DMatrix<f64>,
    blocks: &[(usize, usize)],
    c: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = t.nrows();
    let mut y = DMatrix::<f64>::zeros(n, n);
    for (li, &(cl, nl)) in blocks.iter().enumerate() {
        // F = C[cl.., cols_l] - Y[cl.., ..cl] T[..cl, cols_l]
        let mut f = c.view((cl, cl), (n - cl, nl)).clone_owned();
        if cl > 0 {
            f -= y.view((cl, 0), (n - cl, cl)) * t.view((0, cl), (cl, nl));
        }
        for &(rk, nk) in &blocks[..li] {
            let upper = y.view((cl, rk), (nl, nk)).transpose();
            y.view_mut((rk, cl), (nk, nl)).copy_from(&upper);
        }
        for &(rk, nk) in &blocks[li..] {
            let mut g = f.view((rk - cl, 0), (nk, nl)).clone_owned();
            if rk > 0 {
                g -= t.view((0, rk), (rk, nk)).transpose() * y.view((0, cl), (rk, nl));
            }
            let tkk = t.view((rk, rk), (nk, nk));
            let tll = t.view((cl, cl), (nl, nl));
            let z = solve_small_sylvester(&tkk.clone_owned(), &tll.clone_owned(), &g)?;
            y.view_mut((rk, cl), (nk, nl)).copy_from(&z);
        }
    }
    Ok(y)
}

/// `Tkkᵀ Z + Z Tll = G` for blocks of order at most 2.
fn solve_small_sylvester(
    tkk: &DMatrix<f64>,
    tll: &DMatrix<f64>,
    g: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let (nk, nl) = (tkk.nrows(), tll.nrows());
    let scale = tkk.amax().max(tll.amax()).max(f64::MIN_POSITIVE);
    if nk == 1 && nl == 1 {
        let den = tkk[(0, 0)] + tll[(0, 0)];
        if den.abs() <= 8.0 * f64::EPSILON * scale {
            return Err(Error::SingularReduction);
        }
        return Ok(DMatrix::from_element(1, 1, g[(0, 0)] / den));
    }
    let m = nk * nl;
    let mut k = DMatrix::<f64>::zeros(m, m);
    let mut rhs = nalgebra::DVector::<f64>::zeros(m);
    for c in 0..nl {
        for r in 0..nk {
            let row = r + c * nk;
            for s in 0..nk {
                k[(row, s + c * nk)] += tkk[(s, r)];
            }
            for s in 0..nl {
                k[(row, r + s * nk)] += tll[(s, c)];
            }
            rhs[row] = g[(r, c)];
        }
    }
    let lu = k.full_piv_lu();
    let u = lu.u();
    let min_pivot = (0..m).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if min_pivot <= 8.0 * f64::EPSILON * scale {
        return Err(Error::SingularReduction);
    }
    let z = lu.solve(&rhs).ok_or(Error::SingularReduction)?;
    Ok(DMatrix::from_column_slice(nk, nl, z.as_slice()))
}
