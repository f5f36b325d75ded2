use std::path::PathBuf;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use sdre::analysis::{bound_integral, BoundEstimate, ResidualForm};
use sdre::model::{BuiltinSetup, ModelParams, ZPerturbation};
use sdre::sdc_search::{root_from_profile, scan_residual};
use sdre::sdre::{gain_direct, StrategyKind, StrategyState};
use sdre::sim::{
    numerical_rank, offdiag_profile, run_receding_horizon, singular_value_profile, Integrator,
    RunOptions, Scheme, TrajectoryRecord,
};

use crate::config::ExperimentConfig;
use crate::error::{classify, CliError};
use crate::output::{self, real};

#[derive(Clone, Debug, Serialize)]
pub struct IntegratorSummary {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_final: f64,
}

impl IntegratorSummary {
    fn of(setup: &BuiltinSetup) -> Self {
        IntegratorSummary {
            scheme: setup.integrator.scheme,
            dt: setup.integrator.dt,
            t_final: setup.integrator.t_final,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub model: String,
    pub params: ModelParams,
    pub strategy: StrategyKind,
    pub integrator: IntegratorSummary,
    pub total_cost: f64,
    /// Seconds spent computing gains.
    pub wall_time_total: f64,
    pub diverged: bool,
    /// Recorded time points, `t = 0` included.
    pub steps: usize,
    pub fallbacks: usize,
    pub certificate_failures: usize,
    pub zero_solve_steps: usize,
    pub bound: Option<BoundEstimate>,
    pub artifacts: Vec<PathBuf>,
}

fn run_options(cfg: &ExperimentConfig) -> RunOptions {
    let a = &cfg.analysis;
    RunOptions {
        residual: a.residual_on,
        residual_stride: a.residual_stride,
        residual_form: a.residual_form,
        corrected: a.corrected,
        divergence_threshold: a.divergence_threshold,
    }
}

fn run_trajectory(
    cfg: &ExperimentConfig,
    setup: &BuiltinSetup,
    kind: StrategyKind,
) -> Result<TrajectoryRecord, CliError> {
    let integ = Integrator::new(setup.integrator.clone()).map_err(classify)?;
    let model = setup.model.as_ref();
    let mut st = StrategyState::new(kind, model, &setup.cost)
        .map_err(classify)?
        .with_nk(cfg.strategy.nk_tol, cfg.strategy.nk_max_iter);
    Ok(run_receding_horizon(model, &setup.cost, &mut st, &integ, &setup.x0, &run_options(cfg))?)
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<Summary, CliError> {
    cfg.validate()?;
    let dir = cfg.prepare_output_dir()?;
    let setup = cfg.setup()?;
    let (d, m) = (setup.model.dim_state(), setup.model.dim_control());
    info!("simulate {} with {} (d = {d})", cfg.model.name, cfg.strategy.kind);
    let rec = run_trajectory(cfg, &setup, cfg.strategy.kind)?;
    if rec.diverged {
        warn!("trajectory left the divergence threshold at t = {}", rec.times.last().unwrap_or(&0.0));
    }

    let mut artifacts = vec![dir.join(output::TRAJECTORY_CSV)];
    output::write_trajectory(&artifacts[0], &rec, d, m)?;
    let bound = if cfg.analysis.residual_on {
        let path = dir.join(output::RESIDUAL_CSV);
        output::write_residuals(&path, &rec)?;
        artifacts.push(path);
        Some(bound_integral(&rec)?)
    } else {
        None
    };
    let summary_path = dir.join(output::SUMMARY_JSON);
    artifacts.push(summary_path.clone());
    let summary = Summary {
        model: cfg.model.name.clone(),
        params: cfg.model.params.clone(),
        strategy: cfg.strategy.kind,
        integrator: IntegratorSummary::of(&setup),
        total_cost: rec.total_cost,
        wall_time_total: rec.wall_time_total,
        diverged: rec.diverged,
        steps: rec.len(),
        fallbacks: rec.fallbacks,
        certificate_failures: rec
            .step_stats
            .iter()
            .filter(|s| s.certificate_holds == Some(false))
            .count(),
        zero_solve_steps: rec.zero_solve_steps(),
        bound,
        artifacts,
    };
    output::write_json(&summary_path, &summary)?;
    Ok(summary)
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub strategy: StrategyKind,
    pub mu: Option<f64>,
    pub wall_time: Option<f64>,
    pub total_cost: Option<f64>,
    pub diverged: Option<bool>,
    pub steps: Option<usize>,
    pub fallbacks: Option<usize>,
    /// `ok` or `failed`.
    pub status: String,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub model: String,
    pub params: ModelParams,
    pub integrator: IntegratorSummary,
    pub rows: Vec<BenchRow>,
}

pub const BENCH_HEADER: [&str; 9] = [
    "strategy",
    "mu",
    "wall_time",
    "total_cost",
    "diverged",
    "steps",
    "fallbacks",
    "status",
    "error",
];

fn bench_cell(cfg: &ExperimentConfig, kind: StrategyKind, mu: Option<f64>) -> BenchRow {
    let mut params = cfg.model.params.clone();
    if mu.is_some() {
        params.mu = mu;
    }
    let result = cfg
        .setup_with(&params)
        .and_then(|setup| run_trajectory(cfg, &setup, kind));
    match result {
        Ok(rec) => BenchRow {
            strategy: kind,
            mu: params.mu,
            wall_time: Some(rec.wall_time_total),
            total_cost: Some(rec.total_cost),
            diverged: Some(rec.diverged),
            steps: Some(rec.len()),
            fallbacks: Some(rec.fallbacks),
            status: "ok".into(),
            error: None,
        },
        Err(e) => {
            warn!("bench cell {kind} mu={mu:?} failed: {e}");
            BenchRow {
                strategy: kind,
                mu: params.mu,
                wall_time: None,
                total_cost: None,
                diverged: None,
                steps: None,
                fallbacks: None,
                status: "failed".into(),
                error: Some(e.to_string()),
            }
        }
    }
}

pub fn bench(cfg: &ExperimentConfig) -> Result<BenchReport, CliError> {
    let Some(b) = &cfg.bench else {
        return Err(CliError::Config(
            "bench.strategies: missing (pass --strategies or add a [bench] section)".into(),
        ));
    };
    cfg.validate()?;
    let dir = cfg.prepare_output_dir()?;
    let setup = cfg.setup()?;
    let mus: Vec<Option<f64>> = if b.mu.is_empty() {
        vec![None]
    } else {
        b.mu.iter().copied().map(Some).collect()
    };
    let cells: Vec<(StrategyKind, Option<f64>)> = mus
        .iter()
        .flat_map(|&mu| b.strategies.iter().map(move |&k| (k, mu)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(b.jobs)
        .build()
        .map_err(|e| CliError::Config(format!("bench.jobs: {e}")))?;
    let rows: Vec<BenchRow> =
        pool.install(|| cells.par_iter().map(|&(k, mu)| bench_cell(cfg, k, mu)).collect());

    let mut w = csv::Writer::from_path(dir.join(output::BENCH_CSV))?;
    w.write_record(BENCH_HEADER)?;
    for r in &rows {
        w.write_record([
            r.strategy.to_string(),
            r.mu.map(real).unwrap_or_default(),
            r.wall_time.map(real).unwrap_or_default(),
            r.total_cost.map(real).unwrap_or_default(),
            r.diverged.map(|v| v.to_string()).unwrap_or_default(),
            r.steps.map(|v| v.to_string()).unwrap_or_default(),
            r.fallbacks.map(|v| v.to_string()).unwrap_or_default(),
            r.status.clone(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    let report = BenchReport {
        model: cfg.model.name.clone(),
        params: cfg.model.params.clone(),
        integrator: IntegratorSummary::of(&setup),
        rows,
    };
    output::write_json(&dir.join(output::BENCH_JSON), &report)?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct SdcRootReport {
    pub model: String,
    pub params: ModelParams,
    /// `(i1, j1, j2)`, one-based.
    pub indices: [usize; 3],
    pub form: ResidualForm,
    pub alpha_star: Option<f64>,
    pub e_at_root: Option<f64>,
    pub bracket: Option<[f64; 2]>,
    /// A root was located in the scanned interval.
    pub holds: bool,
    pub evaluations: usize,
}

pub fn sdc_root(cfg: &ExperimentConfig) -> Result<SdcRootReport, CliError> {
    let Some(sdc) = &cfg.sdc else {
        return Err(CliError::Config(
            "sdc: section missing (pass --indices or add an [sdc] section)".into(),
        ));
    };
    cfg.validate()?;
    let dir = cfg.prepare_output_dir()?;
    let setup = cfg.setup()?;
    let [i1, j1, j2] = sdc.indices;
    let z = ZPerturbation::from_one_based(i1, j1, j2)
        .and_then(|z| z.check(setup.model.dim_state()).map(|_| z))
        .map_err(|e| CliError::Config(format!("sdc.indices: {e}")))?;
    let grid = sdc.alpha_grid.values();
    let profile = scan_residual(&setup.model, &setup.cost, &setup.x0, z, &grid, sdc.form)?;
    output::write_pairs(
        &dir.join(output::SDC_PROFILE_CSV),
        ["alpha", "E"],
        profile
            .alphas
            .iter()
            .zip(&profile.e_values)
            .map(|(&a, e)| (real(a), e.map(real).unwrap_or_default())),
    )?;

    let mut report = SdcRootReport {
        model: cfg.model.name.clone(),
        params: cfg.model.params.clone(),
        indices: sdc.indices,
        form: sdc.form,
        alpha_star: None,
        e_at_root: None,
        bracket: None,
        holds: false,
        evaluations: grid.len(),
    };
    match root_from_profile(&setup.model, &setup.cost, &setup.x0, z, &profile, sdc.form) {
        Ok(root) => {
            report.alpha_star = Some(root.alpha_star);
            report.e_at_root = Some(root.e_at_root);
            report.bracket = Some([root.bracket.0, root.bracket.1]);
            report.holds = true;
            report.evaluations = root.evaluations;
        }
        Err(e @ sdre::Error::NoBracket { .. }) => warn!("{e}"),
        Err(e) => return Err(e.into()),
    }
    output::write_json(&dir.join(output::SDC_ROOT_JSON), &report)?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub model: String,
    pub params: ModelParams,
    pub dim: usize,
    pub sigma_max: f64,
    pub rank_tol: f64,
    pub numerical_rank: usize,
}

pub fn spectrum(cfg: &ExperimentConfig, rank_tol: f64) -> Result<SpectrumReport, CliError> {
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(CliError::Config("rank_tol: must lie in (0, 1)".into()));
    }
    cfg.validate()?;
    let dir = cfg.prepare_output_dir()?;
    let setup = cfg.setup()?;
    let p = gain_direct(setup.model.as_ref(), &setup.cost, &setup.x0)?.p;
    let sv = singular_value_profile(&p);
    output::write_pairs(
        &dir.join(output::SPECTRUM_CSV),
        ["index", "sigma"],
        sv.iter().enumerate().map(|(i, &s)| ((i + 1).to_string(), real(s))),
    )?;
    output::write_pairs(
        &dir.join(output::OFFDIAG_CSV),
        ["k", "max_offdiag_k"],
        offdiag_profile(&p).into_iter().enumerate().map(|(k, v)| (k.to_string(), real(v))),
    )?;
    let report = SpectrumReport {
        model: cfg.model.name.clone(),
        params: cfg.model.params.clone(),
        dim: sv.len(),
        sigma_max: sv.first().copied().unwrap_or(0.0),
        rank_tol,
        numerical_rank: numerical_rank(&sv, rank_tol),
    };
    output::write_json(&dir.join(output::SPECTRUM_JSON), &report)?;
    Ok(report)
}
