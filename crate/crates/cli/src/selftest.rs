//! Fast numerical checks with closed-form or independent references.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdre::analysis::{compute_phi, compute_phi_adjoint};
use sdre::mateq::{newton_kleinman, solve_care, solve_lyapunov, spectral_abscissa};
use sdre::model::{builtin_model, ModelParams, VanDerPol, VdpForm, ZPerturbation};
use sdre::sdre::gain_direct;

use crate::error::CliError;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String), sdre::Error>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

pub fn run(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 12;
    let a = random_matrix(&mut rng, n, n) - DMatrix::identity(n, n) * (n as f64);
    let b = random_matrix(&mut rng, n, n / 2);
    let g = random_matrix(&mut rng, n, n);
    let q = &g * g.transpose() + DMatrix::identity(n, n);
    let r = DMatrix::identity(n / 2, n / 2);
    let x = DVector::from_fn(20, |_, _| rng.random_range(-1.0..1.0));

    vec![
        check("scalar CARE closed form", || {
            let one = DMatrix::from_element(1, 1, 1.0);
            let p = solve_care(&one, &one, &one, &one)?.p[(0, 0)];
            let err = (p - (1.0 + 2f64.sqrt())).abs();
            Ok((err < 1e-12, format!("error {err:.1e}")))
        }),
        check("Lyapunov residual", || {
            let xs = solve_lyapunov(&a, &q)?;
            let res = (a.transpose() * &xs + &xs * &a + &q).norm() / q.norm();
            Ok((res < 1e-10, format!("relative residual {res:.1e}")))
        }),
        check("CARE stabilizes", || {
            let sol = solve_care(&a, &b, &q, &r)?;
            let ok = sol.closed_loop_abscissa < 0.0 && sol.residual_norm <= 1e-9 * q.norm().max(1.0);
            Ok((ok, format!("abscissa {:.3e}, residual {:.1e}", sol.closed_loop_abscissa, sol.residual_norm)))
        }),
        check("Newton-Kleinman agrees with direct", || {
            let direct = solve_care(&a, &b, &q, &r)?.p;
            let nk = newton_kleinman(&a, &b, &q, &r, &DMatrix::zeros(n, n), 1e-10, 50)?.p;
            let diff = (&nk - &direct).norm() / direct.norm();
            Ok((diff < 1e-8, format!("relative difference {diff:.1e}")))
        }),
        check("Van der Pol gain", || {
            let vdp = VanDerPol::new(VdpForm::Baseline);
            let g = gain_direct(&vdp, &vdp.cost(), &DVector::from_vec(vec![-0.5, 0.5]))?;
            let err = (g.p - DMatrix::identity(2, 2)).amax().max((g.u[0] - 0.25).abs());
            Ok((err < 1e-12, format!("error {err:.1e}")))
        }),
        check("perturbation annihilates state", || {
            let z = ZPerturbation::from_one_based(1, 1, 2)?;
            let v = (z.matrix(&x) * &x).amax();
            Ok((v < 1e-15, format!("max |Z(x) x| {v:.1e}")))
        }),
        check("gradient correction, direct vs adjoint", || {
            let setup = builtin_model("zeldovich", &ModelParams { d: Some(20), ..Default::default() })?;
            let m = setup.model.as_ref();
            let p = gain_direct(m, &setup.cost, &x)?.p;
            let direct = compute_phi(m, &setup.cost, &x, &p)?;
            let adjoint = compute_phi_adjoint(m, &setup.cost, &x, &p)?;
            let diff = (&direct - &adjoint).norm() / direct.norm().max(1e-300);
            Ok((diff < 1e-8, format!("relative difference {diff:.1e}")))
        }),
        check("offline closed loop Hurwitz", || {
            let setup = builtin_model("zeldovich", &ModelParams { d: Some(40), ..Default::default() })?;
            let off = sdre::sdre::offline_phase(setup.model.as_ref(), &setup.cost)?;
            let abscissa = spectral_abscissa(&off.c0)?;
            Ok((abscissa < 0.0, format!("abscissa {abscissa:.3e}")))
        }),
    ]
}

/// Prints one line per check; fails if any check failed.
pub fn report(checks: &[Check]) -> Result<(), CliError> {
    for c in checks {
        let tag = if c.passed { "ok  " } else { "FAIL" };
        println!("{tag} {}: {}", c.name, c.detail);
    }
    match checks.iter().filter(|c| !c.passed).count() {
        0 => Ok(()),
        n => Err(CliError::Selftest(n)),
    }
}
