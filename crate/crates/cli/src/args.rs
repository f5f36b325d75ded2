//! Command-line surface. Every flag that is given replaces the matching
//! config field.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::de::{DeserializeOwned, IntoDeserializer};

use sdre::analysis::ResidualForm;
use sdre::model::{InitialProfile, NeumannStencil, Quadrature, VdpForm};
use sdre::sdre::StrategyKind;
use sdre::sim::Scheme;

use crate::config::{AlphaGrid, BenchSection, ExperimentConfig, SdcSection};
use crate::error::CliError;

pub const OUTPUT_DIR_ENV: &str = "SDRE_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "sdre", version, about = "SDRE feedback synthesis and HJB residual analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one closed-loop trajectory; writes trajectory.csv and summary.json.
    Simulate(RunArgs),
    /// Strategy × mu comparison table; writes bench.csv and bench.json.
    Bench(BenchArgs),
    /// Scan and root-find the residual along a one-parameter coefficient family.
    SdcRoot(SdcArgs),
    /// Singular values and off-diagonal decay of P at the initial state.
    Spectrum(SpectrumArgs),
    /// Quick numerical sanity checks of the solvers.
    Selftest(SelftestArgs),
}

/// Snake-case enum names as used in config files; `-` is accepted for `_`.
fn parse_enum<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    let s = s.replace('-', "_");
    T::deserialize(s.as_str().into_deserializer())
        .map_err(|e: serde::de::value::Error| e.to_string())
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// TOML experiment file.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    #[arg(long, env = OUTPUT_DIR_ENV)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,

    /// lqr, van_der_pol, allen_cahn or zeldovich.
    #[arg(long)]
    pub model: Option<String>,
    /// Zeldovich preset, 1 or 2.
    #[arg(long)]
    pub case: Option<u8>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Initial state, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
    pub x0: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_enum::<InitialProfile>)]
    pub init: Option<InitialProfile>,
    /// Van der Pol factorization: baseline or alternative.
    #[arg(long, value_parser = parse_enum::<VdpForm>)]
    pub form: Option<VdpForm>,
    #[arg(long, value_parser = parse_enum::<NeumannStencil>)]
    pub stencil: Option<NeumannStencil>,
    #[arg(long, value_parser = parse_enum::<Quadrature>)]
    pub quadrature: Option<Quadrature>,

    /// direct, offline_online or cascade_nk.
    #[arg(long)]
    pub strategy: Option<StrategyKind>,
    #[arg(long)]
    pub nk_tol: Option<f64>,
    #[arg(long)]
    pub nk_max_iter: Option<usize>,

    #[arg(long, value_parser = parse_enum::<Scheme>)]
    pub scheme: Option<Scheme>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,

    /// Evaluate the HJB residual along the trajectory.
    #[arg(long)]
    pub residual: bool,
    #[arg(long)]
    pub residual_stride: Option<usize>,
    #[arg(long, value_parser = parse_enum::<ResidualForm>)]
    pub residual_form: Option<ResidualForm>,
    /// Feed back the gradient-corrected control.
    #[arg(long)]
    pub corrected: bool,
    #[arg(long)]
    pub divergence_threshold: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_delimiter = ',')]
    pub strategies: Option<Vec<StrategyKind>>,
    #[arg(long = "mus", value_delimiter = ',')]
    pub mus: Option<Vec<f64>>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct SdcArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// `i1,j1,j2`, one-based.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub indices: Option<Vec<usize>>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_max: Option<f64>,
    #[arg(long)]
    pub alpha_points: Option<usize>,
    #[arg(long, value_parser = parse_enum::<ResidualForm>)]
    pub sdc_form: Option<ResidualForm>,
}

#[derive(Debug, Default, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Singular values above `rank_tol · σ₁` count toward the rank.
    #[arg(long, default_value_t = 1e-8)]
    pub rank_tol: f64,
}

#[derive(Debug, Default, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

macro_rules! set {
    ($dst:expr, $src:expr) => {
        if let Some(v) = $src.clone() {
            $dst = v;
        }
    };
}

macro_rules! set_opt {
    ($dst:expr, $src:expr) => {
        if $src.is_some() {
            $dst = $src.clone();
        }
    };
}

impl RunArgs {
    /// Config file (or a bare default when none is given) with flags applied.
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => {
                let name = self.model.as_deref().ok_or_else(|| {
                    CliError::Config("model.name: pass --model or --config".into())
                })?;
                ExperimentConfig::new(name)
            }
        };
        self.apply(&mut cfg);
        Ok(cfg)
    }

    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        set!(cfg.output_dir, self.output_dir);
        set!(cfg.seed, self.seed);
        set!(cfg.model.name, self.model);
        let p = &mut cfg.model.params;
        set_opt!(p.case, self.case);
        set_opt!(p.mu, self.mu);
        set_opt!(p.d, self.d);
        set_opt!(p.sigma, self.sigma);
        set_opt!(p.gamma, self.gamma);
        set_opt!(p.nu, self.nu);
        set_opt!(p.x0, self.x0);
        set_opt!(p.init, self.init);
        set_opt!(p.form, self.form);
        set_opt!(p.stencil, self.stencil);
        set_opt!(p.quadrature, self.quadrature);
        set!(cfg.strategy.kind, self.strategy);
        set!(cfg.strategy.nk_tol, self.nk_tol);
        set!(cfg.strategy.nk_max_iter, self.nk_max_iter);
        set_opt!(cfg.integrator.scheme, self.scheme);
        set_opt!(cfg.integrator.dt, self.dt);
        set_opt!(cfg.integrator.t_final, self.t_final);
        cfg.analysis.residual_on |= self.residual;
        cfg.analysis.corrected |= self.corrected;
        set!(cfg.analysis.residual_stride, self.residual_stride);
        set!(cfg.analysis.residual_form, self.residual_form);
        set!(cfg.analysis.divergence_threshold, self.divergence_threshold);
    }
}

impl BenchArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = self.run.resolve()?;
        if self.strategies.is_some() || self.mus.is_some() || self.jobs.is_some() {
            let b = cfg.bench.get_or_insert_with(|| BenchSection {
                strategies: Vec::new(),
                mu: Vec::new(),
                jobs: 1,
            });
            set!(b.strategies, self.strategies);
            set!(b.mu, self.mus);
            set!(b.jobs, self.jobs);
        }
        Ok(cfg)
    }
}

impl SdcArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = self.run.resolve()?;
        if let Some(ix) = &self.indices {
            let indices: [usize; 3] = ix.as_slice().try_into().map_err(|_| {
                CliError::Config(format!("sdc.indices: expected 3 values, got {}", ix.len()))
            })?;
            match &mut cfg.sdc {
                Some(s) => s.indices = indices,
                None => {
                    cfg.sdc = Some(SdcSection {
                        indices,
                        alpha_grid: AlphaGrid::default(),
                        form: ResidualForm::AsPublished,
                    })
                }
            }
        }
        if let Some(s) = &mut cfg.sdc {
            set!(s.alpha_grid.min, self.alpha_min);
            set!(s.alpha_grid.max, self.alpha_max);
            set!(s.alpha_grid.points, self.alpha_points);
            set!(s.form, self.sdc_form);
        }
        Ok(cfg)
    }
}
