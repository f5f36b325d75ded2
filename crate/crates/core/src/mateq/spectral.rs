use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use super::schur::RealSchur;
use super::SpectralInfo;
use crate::error::{Error, Result};

/// Eigenvector conditioning beyond which a matrix counts as defective.
pub const DEFECTIVE_COND: f64 = 1e12;

pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    Ok(RealSchur::new(a)?.eigenvalues())
}

/// Maximum real part over the spectrum.
pub fn spectral_abscissa(a: &DMatrix<f64>) -> Result<f64> {
    Ok(RealSchur::new(a)?.spectral_abscissa())
}

pub fn is_hurwitz(a: &DMatrix<f64>) -> Result<bool> {
    Ok(spectral_abscissa(a)? < 0.0)
}

/// Spectral norm (largest singular value).
pub fn norm2(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().max()
}

/// Singular values in descending order.
pub fn singular_values_desc(a: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

pub fn min_symmetric_eigenvalue(a: &DMatrix<f64>) -> f64 {
    super::symmetrize(a).symmetric_eigenvalues().min()
}

/// Stability margin `α = min |Re λ|` and eigenvector conditioning
/// `M = ‖V‖₂‖V⁻¹‖₂` (unit-norm eigenvector columns) of a Hurwitz matrix.
pub fn spectral_info(c: &DMatrix<f64>) -> Result<SpectralInfo> {
    let n = c.nrows();
    if n != c.ncols() || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "spectral info of a {}x{} matrix",
            n,
            c.ncols()
        )));
    }
    let evals = eigenvalues(c)?;
    let abscissa = evals.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    if abscissa >= 0.0 {
        return Err(Error::NotHurwitz { abscissa });
    }
    let alpha = evals.iter().map(|l| l.re.abs()).fold(f64::INFINITY, f64::min);

    let v = eigenvectors(c)?;
    let sv = v.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(cond <= DEFECTIVE_COND) {
        return Err(Error::NearDefective { cond });
    }
    Ok(SpectralInfo {
        alpha,
        cond_eigvec: cond.max(1.0),
    })
}

/// Right eigenvectors as unit-norm columns, from the complex Schur form by
/// triangular back-substitution.
pub fn eigenvectors(c: &DMatrix<f64>) -> Result<DMatrix<Complex64>> {
    let n = c.nrows();
    let cz = c.map(|x| Complex64::new(x, 0.0));
    let (qz, tz) = Schur::try_new(cz, f64::EPSILON, 500 * n.max(4))
        .ok_or(Error::SchurFailed)?
        .unpack();
    let tnorm = tz.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE);
    let mut vt = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let lk = tz[(k, k)];
        vt[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                acc += tz[(i, j)] * vt[(j, k)];
            }
            let mut den = tz[(i, i)] - lk;
            if den.norm() < smin {
                den = Complex64::new(smin, 0.0);
            }
            vt[(i, k)] = -acc / den;
        }
    }
    let mut v = qz * vt;
    for mut col in v.column_iter_mut() {
        let nrm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            col.iter_mut().for_each(|z| *z /= nrm);
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_info() {
        let c = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -3.0]));
        let info = spectral_info(&c).unwrap();
        assert!((info.alpha - 1.0).abs() < 1e-14);
        assert!((info.cond_eigvec - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangular_info_matches_closed_form() {
        // Eigenvectors (1, 0) and (10, -1)/sqrt(101). For unit columns
        // u, v with cos θ = |uᵀv| the 2x2 condition number is
        // (1 + cos θ) / sin θ.
        let c = DMatrix::from_row_slice(2, 2, &[-1.0, 10.0, 0.0, -2.0]);
        let info = spectral_info(&c).unwrap();
        let cos = 10.0 / 101f64.sqrt();
        let sin = 1.0 / 101f64.sqrt();
        let expected = (1.0 + cos) / sin;
        assert!((info.alpha - 1.0).abs() < 1e-14);
        assert!((info.cond_eigvec - expected).abs() < 1e-9 * expected, "{}", info.cond_eigvec);
    }

    #[test]
    fn unstable_matrix_has_no_margin() {
        let c = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 0.5]));
        assert!(matches!(spectral_info(&c), Err(Error::NotHurwitz { .. })));
    }

    #[test]
    fn jordan_block_is_defective() {
        let c = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -1.0]);
        assert!(matches!(spectral_info(&c), Err(Error::NearDefective { .. })));
    }
}
