use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use sdre::model::{
    builtin_model, eval_semilinear, neumann_laplacian, perturbed_model, AllenCahn, InitialProfile,
    ModelParams, NeumannStencil, Quadrature, SemilinearModel, VanDerPol, VdpForm, ZPerturbation,
    Zeldovich, ZeldovichParams,
};
use sdre::Error;

#[test]
fn van_der_pol_matrices_at_two_zero() {
    let vdp = VanDerPol::new(VdpForm::Baseline);
    let (a, b) = eval_semilinear(&vdp, &DVector::from_vec(vec![2.0, 0.0])).unwrap();
    assert_eq!(a, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 1.5]));
    assert_eq!(b, DMatrix::from_column_slice(2, 1, &[0.0, 2.0]));
    // uncontrollable at x₁ = 0 but still constructible
    let (_, b0) = eval_semilinear(&vdp, &DVector::from_vec(vec![0.0, 1.0])).unwrap();
    assert_eq!(b0.amax(), 0.0);
}

#[test]
fn van_der_pol_cost_weights() {
    let c = VanDerPol::new(VdpForm::Baseline).cost();
    assert_eq!(c.q(), &DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
    assert_eq!(c.r(), &DMatrix::from_element(1, 1, 1.0));
}

#[test]
fn lqr_matrix_is_state_independent() {
    let setup = builtin_model("lqr", &ModelParams::default()).unwrap();
    let m = setup.model.as_ref();
    let a1 = m.a_of_x(&DVector::from_vec(vec![1.0, 2.0]));
    let a2 = m.a_of_x(&DVector::from_vec(vec![-7.0, 0.3]));
    assert_eq!(a1, a2);
}

#[test]
fn zeldovich_rows_reproduce_reaction_diffusion() {
    let z = Zeldovich::new(ZeldovichParams::case(1).unwrap()).unwrap();
    let y = z.profile(InitialProfile::Cos).map(|v| 0.7 * v + 0.2);
    let (lap, _) = neumann_laplacian(100, NeumannStencil::Symmetric);
    let p = z.params();
    let f = lap * &y * p.sigma + &y * p.nu + y.map(|v| p.mu * v * v * (1.0 - v));
    let ay = z.a_of_x(&y) * &y;
    assert!((ay - &f).norm() <= 1e-12 * (1.0 + f.norm()));
}

#[test]
fn zeldovich_case_presets_and_initial_state() {
    let setup = builtin_model("zeldovich", &ModelParams { case: Some(1), ..Default::default() }).unwrap();
    assert_eq!(setup.model.dim_state(), 100);
    let h = 1.0 / 99.0;
    for (i, v) in setup.x0.iter().enumerate() {
        assert!((v - (std::f64::consts::PI * i as f64 * h).cos()).abs() < 1e-15);
    }
    let c2 = ZeldovichParams::case(2).unwrap();
    assert_eq!((c2.sigma, c2.gamma, c2.nu), (1e-2, 0.1, 0.5));
    assert_eq!((c2.omega_c, c2.omega_o), ([0.0, 1.0], [0.0, 1.0]));
    assert!(ZeldovichParams::case(3).is_err());
}

#[test]
fn zeldovich_cost_uses_grid_weight() {
    let z = Zeldovich::new(ZeldovichParams::case(1).unwrap()).unwrap();
    let c = z.cost();
    let h = z.h();
    for i in 0..100 {
        let want = if z.observe_indices().contains(&i) { h } else { 0.0 };
        assert_eq!(c.q()[(i, i)], want);
    }
    let m = z.control_indices().len();
    assert_eq!(c.r(), &(DMatrix::identity(m, m) * (0.01 * h)));
}

#[test]
fn laplacian_conservation_and_symmetry() {
    for stencil in [NeumannStencil::Symmetric, NeumannStencil::GhostPoint] {
        let (l, h) = neumann_laplacian(30, stencil);
        assert!((h - 1.0 / 29.0).abs() < 1e-16);
        for r in l.row_iter() {
            assert!(r.sum().abs() <= 1e-9 * r.amax());
        }
    }
    let (l, _) = neumann_laplacian(30, NeumannStencil::Symmetric);
    assert_eq!(l, l.transpose());
    let (g, h) = neumann_laplacian(30, NeumannStencil::GhostPoint);
    assert!((g[(0, 0)] * h * h + 2.0).abs() < 1e-12 && (g[(0, 1)] * h * h - 2.0).abs() < 1e-12);
}

#[test]
fn z_perturbation_example() {
    let z = ZPerturbation::from_one_based(1, 1, 2).unwrap();
    let x = DVector::from_vec(vec![3.0, 5.0]);
    assert_eq!(z.matrix(&x), DMatrix::from_row_slice(2, 2, &[5.0, -3.0, 0.0, 0.0]));
    assert_eq!(z.matrix(&x) * &x, DVector::zeros(2));
    assert!(matches!(ZPerturbation::from_one_based(1, 2, 2), Err(Error::IndexOutOfRange(_))));
    assert!(ZPerturbation::new(0, 0, 5).unwrap().check(3).is_err());
}

#[test]
fn zero_perturbation_is_identity() {
    let base: Arc<dyn SemilinearModel> = Arc::new(VanDerPol::new(VdpForm::Baseline));
    let pm = perturbed_model(base.clone(), ZPerturbation::new(0, 0, 1).unwrap(), 0.0).unwrap();
    for x in [[0.1, 0.2], [-1.5, 2.0], [3.0, -0.4]] {
        let x = DVector::from_row_slice(&x);
        assert_eq!(pm.a_of_x(&x), base.a_of_x(&x));
    }
}

#[test]
fn allen_cahn_perturbed_drift_is_unchanged() {
    let ac = AllenCahn::new(100, AllenCahn::DEFAULT_SIGMA, 0.1, NeumannStencil::Symmetric, Quadrature::Grid)
        .unwrap();
    let y0 = ac.profile(InitialProfile::Cos);
    let base: Arc<dyn SemilinearModel> = Arc::new(ac);
    let pm = perturbed_model(base.clone(), ZPerturbation::from_one_based(1, 1, 2).unwrap(), 9.23).unwrap();
    let f0 = base.drift(&y0);
    assert!((pm.a_of_x(&y0) * &y0 - &f0).amax() <= 1e-12 * (1.0 + f0.amax()));
    assert!((pm.drift(&y0) - &f0).amax() == 0.0);
}

#[test]
fn alternative_van_der_pol_differs_by_z() {
    let x = DVector::from_vec(vec![-0.5, 0.5]);
    let base = VanDerPol::new(VdpForm::Baseline).a_of_x(&x);
    let alt = VanDerPol::new(VdpForm::Alternative).a_of_x(&x);
    let z = ZPerturbation::new(0, 0, 1).unwrap().matrix(&x);
    assert!((alt - base + z).amax() < 1e-15);
}

#[test]
fn bad_parameters_are_rejected() {
    let bad = ModelParams { sigma: Some(-1.0), ..Default::default() };
    assert!(matches!(builtin_model("zeldovich", &bad), Err(Error::InvalidParams(_))));
    assert!(matches!(builtin_model("heat", &ModelParams::default()), Err(Error::UnknownModel(_))));
    let stray = ModelParams { mu: Some(1.0), ..Default::default() };
    assert!(builtin_model("van_der_pol", &stray).is_err());
}
