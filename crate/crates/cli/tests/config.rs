use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;

use sdre::analysis::ResidualForm;
use sdre::model::{InitialProfile, ModelParams, NeumannStencil, Quadrature, VdpForm};
use sdre::sdre::StrategyKind;
use sdre::sim::Scheme;
use sdre_cli::args::{Cli, Command};
use sdre_cli::config::{AlphaGrid, BenchSection, SdcSection};
use sdre_cli::{CliError, ExperimentConfig};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn full_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::new("zeldovich");
    c.output_dir = PathBuf::from("runs/x");
    c.seed = 17;
    c.model.params = ModelParams {
        d: Some(64),
        sigma: Some(0.012_345_678_901_234_5),
        mu: Some(2.0),
        case: Some(2),
        omega_c: Some([0.1, 0.9]),
        init: Some(InitialProfile::Sin),
        x0: None,
        stencil: Some(NeumannStencil::GhostPoint),
        quadrature: Some(Quadrature::Unit),
        ..Default::default()
    };
    c.strategy.kind = StrategyKind::OfflineOnline;
    c.strategy.nk_tol = 3.3e-7;
    c.integrator.scheme = Some(Scheme::SemiImplicitEuler);
    c.integrator.dt = Some(0.1 / 3.0);
    c.analysis.residual_on = true;
    c.analysis.residual_stride = 5;
    c.analysis.residual_form = ResidualForm::AsPublished;
    c.sdc = Some(SdcSection {
        indices: [3, 1, 2],
        alpha_grid: AlphaGrid { min: -2.5, max: 7.0, points: 9 },
        form: ResidualForm::ClosedLoop,
    });
    c.bench = Some(BenchSection {
        strategies: vec![StrategyKind::Direct, StrategyKind::CascadeNk],
        mu: vec![0.5, 1.0 / 7.0],
        jobs: 2,
    });
    c
}

#[test]
fn serialized_config_reparses_identically() {
    let c = full_config();
    let text = c.to_toml().unwrap();
    assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c);

    let mut lqr = ExperimentConfig::new("lqr");
    lqr.model.params.a = Some(vec![vec![0.0, 1.0], vec![-2.0, -0.3]]);
    lqr.model.params.b = Some(vec![vec![0.0], vec![1.0]]);
    lqr.model.params.x0 = Some(vec![1e-300, -0.1]);
    let text = lqr.to_toml().unwrap();
    assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), lqr);

    let mut vdp = ExperimentConfig::new("van_der_pol");
    vdp.model.params.form = Some(VdpForm::Alternative);
    assert_eq!(ExperimentConfig::from_toml(&vdp.to_toml().unwrap()).unwrap(), vdp);
}

#[test]
fn checked_in_configs_are_valid_and_round_trip() {
    let mut n = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let c = ExperimentConfig::load(&path).unwrap();
            c.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);
            n += 1;
        }
    }
    assert!(n >= 5);
}

#[test]
fn minimal_config_takes_defaults() {
    let c = ExperimentConfig::from_toml("[model]\nname = \"lqr\"\n").unwrap();
    assert_eq!(c, ExperimentConfig::new("lqr"));
    assert_eq!(c.strategy.kind, StrategyKind::CascadeNk);
    assert_eq!((c.strategy.nk_tol, c.strategy.nk_max_iter), (1e-5, 50));
    assert_eq!(c.analysis.residual_stride, 1);
    let setup = c.setup().unwrap();
    assert_eq!((setup.integrator.dt, setup.integrator.t_final), (1e-2, 10.0));
}

fn config_error(text: &str) -> String {
    match ExperimentConfig::from_toml(text).and_then(|c| c.validate().map(|_| c)) {
        Err(CliError::Config(msg)) => msg,
        other => panic!("expected a configuration error, got {other:?}"),
    }
}

#[test]
fn parse_errors_name_line_and_field() {
    let msg = config_error("[model]\nname = \"zeldovich\"\n\n[integrator]\ndtt = 0.1\n");
    assert!(msg.contains("line 5") && msg.contains("dtt"), "{msg}");
    let msg = config_error("[model]\nname = \"zeldovich\"\n[strategy]\nkind = \"newton\"\n");
    assert!(msg.contains("line 4") && msg.contains("newton"), "{msg}");
    let msg = config_error("[model]\nname = \"zeldovich\"\n[model.params]\nmu = \"two\"\n");
    assert!(msg.contains("line 4"), "{msg}");
}

#[test]
fn semantic_errors_name_the_field() {
    let cases = [
        ("[model]\nname = \"heat\"\n", "model.name"),
        ("[model]\nname = \"lqr\"\n[integrator]\ndt = -1.0\n", "integrator.dt"),
        ("[model]\nname = \"lqr\"\n[integrator]\nt_final = 0.0\n", "integrator.t_final"),
        ("[model]\nname = \"lqr\"\n[integrator]\ndt = 2.0\nt_final = 1.0\n", "integrator.dt"),
        ("[model]\nname = \"lqr\"\n[analysis]\nresidual_stride = 0\n", "analysis.residual_stride"),
        ("[model]\nname = \"lqr\"\n[model.params]\nmu = 1.0\n", "model.params"),
        ("[model]\nname = \"zeldovich\"\n[model.params]\ncase = 3\n", "model.params"),
        ("[model]\nname = \"lqr\"\n[bench]\nstrategies = []\n", "bench.strategies"),
        ("[model]\nname = \"lqr\"\n[sdc]\nindices = [1, 2, 2]\n", "sdc.indices"),
        ("[model]\nname = \"lqr\"\n[sdc]\nindices = [1, 1, 2]\n[sdc.alpha_grid]\nmin = 1.0\nmax = 0.0\n", "sdc.alpha_grid"),
    ];
    for (text, field) in cases {
        let msg = config_error(text);
        assert!(msg.starts_with(field), "{field}: {msg}");
    }
}

#[test]
fn unwritable_output_dir_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("plain-file");
    fs::write(&file, "x").unwrap();
    let mut c = ExperimentConfig::new("lqr");
    c.output_dir = file.join("sub");
    assert!(matches!(c.prepare_output_dir(), Err(CliError::Config(m)) if m.starts_with("output_dir")));
}

fn simulate_args(argv: &[&str]) -> ExperimentConfig {
    let cli = Cli::try_parse_from(argv).unwrap();
    match cli.command {
        Command::Simulate(a) => a.resolve().unwrap(),
        other => panic!("{other:?}"),
    }
}

#[test]
fn flags_override_config_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("exp.toml");
    fs::write(
        &path,
        "output_dir = \"from-file\"\n[model]\nname = \"zeldovich\"\n[model.params]\ncase = 1\nmu = 1.0\nd = 40\n\
         [strategy]\nkind = \"direct\"\n[integrator]\ndt = 0.05\n[analysis]\nresidual_stride = 4\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();

    let base = simulate_args(&["sdre", "simulate", "--config", p]);
    assert_eq!(base.model.params.mu, Some(1.0));
    assert_eq!(base.strategy.kind, StrategyKind::Direct);

    let c = simulate_args(&[
        "sdre", "simulate", "--config", p, "--mu", "2", "--strategy", "offline-online", "--t-final", "1",
        "--output-dir", "from-flag", "--residual", "--residual-form", "as_published",
    ]);
    assert_eq!(c.model.params.mu, Some(2.0));
    assert_eq!(c.model.params.d, Some(40));
    assert_eq!(c.model.params.case, Some(1));
    assert_eq!(c.strategy.kind, StrategyKind::OfflineOnline);
    assert_eq!(c.integrator.dt, Some(0.05));
    assert_eq!(c.integrator.t_final, Some(1.0));
    assert_eq!(c.output_dir, PathBuf::from("from-flag"));
    assert!(c.analysis.residual_on);
    assert_eq!(c.analysis.residual_stride, 4);
    assert_eq!(c.analysis.residual_form, ResidualForm::AsPublished);
}

#[test]
fn negative_initial_state_parses() {
    let c = simulate_args(&["sdre", "simulate", "--model", "van_der_pol", "--x0", "-0.5,0.5", "--corrected"]);
    assert_eq!(c.model.params.x0, Some(vec![-0.5, 0.5]));
    assert!(c.analysis.corrected);
}

#[test]
fn model_is_required_without_config() {
    let cli = Cli::try_parse_from(["sdre", "simulate", "--mu", "1"]).unwrap();
    let Command::Simulate(a) = cli.command else { unreachable!() };
    assert!(matches!(a.resolve(), Err(CliError::Config(m)) if m.starts_with("model.name")));
}

#[test]
fn sdc_and_bench_flags_fill_missing_sections() {
    let cli = Cli::try_parse_from([
        "sdre", "sdc-root", "--model", "allen_cahn", "--indices", "1,1,2", "--alpha-min", "-4", "--alpha-points", "9",
    ])
    .unwrap();
    let Command::SdcRoot(a) = cli.command else { unreachable!() };
    let sdc = a.resolve().unwrap().sdc.unwrap();
    assert_eq!(sdc.indices, [1, 1, 2]);
    assert_eq!(sdc.alpha_grid, AlphaGrid { min: -4.0, max: 10.0, points: 9 });
    assert_eq!(sdc.form, ResidualForm::AsPublished);

    let cli = Cli::try_parse_from(["sdre", "bench", "--model", "zeldovich", "--strategies", "direct,cnk", "--mus", "1,2"])
        .unwrap();
    let Command::Bench(a) = cli.command else { unreachable!() };
    let b = a.resolve().unwrap().bench.unwrap();
    assert_eq!(b.strategies, vec![StrategyKind::Direct, StrategyKind::CascadeNk]);
    assert_eq!(b.mu, vec![1.0, 2.0]);
    assert_eq!(b.jobs, 1);

    assert!(Cli::try_parse_from(["sdre", "bench", "--model", "lqr", "--strategies", "newton"]).is_err());
}
