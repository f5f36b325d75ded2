//! Experiment configuration: a TOML file with nested sections, overridden
//! field by field from the command line.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sdre::analysis::ResidualForm;
use sdre::model::{builtin_model, BuiltinSetup, ModelParams, ZPerturbation};
use sdre::sdc_search::alpha_grid;
use sdre::sdre::StrategyKind;
use sdre::sim::{IntegratorSpec, Scheme};

use crate::error::CliError;

pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Seed for randomized checks in `selftest`.
    #[serde(default)]
    pub seed: u64,
    pub model: ModelSection,
    #[serde(default)]
    pub strategy: StrategySection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdc: Option<SdcSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchSection>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from(DEFAULT_OUTPUT_DIR)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub name: String,
    #[serde(default)]
    pub params: ModelParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategySection {
    pub kind: StrategyKind,
    pub nk_tol: f64,
    pub nk_max_iter: usize,
}

impl Default for StrategySection {
    fn default() -> Self {
        StrategySection {
            kind: StrategyKind::CascadeNk,
            nk_tol: sdre::mateq::DEFAULT_NK_TOL,
            nk_max_iter: sdre::mateq::DEFAULT_NK_MAX_ITER,
        }
    }
}

/// Unset fields fall back to the model's defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub residual_on: bool,
    pub residual_stride: usize,
    pub residual_form: ResidualForm,
    pub corrected: bool,
    pub divergence_threshold: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            residual_on: false,
            residual_stride: 1,
            residual_form: ResidualForm::ClosedLoop,
            corrected: false,
            divergence_threshold: 1e8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdcSection {
    /// `(i1, j1, j2)`, one-based.
    pub indices: [usize; 3],
    #[serde(default)]
    pub alpha_grid: AlphaGrid,
    #[serde(default = "default_sdc_form")]
    pub form: ResidualForm,
}

fn default_sdc_form() -> ResidualForm {
    ResidualForm::AsPublished
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlphaGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        AlphaGrid {
            min: -10.0,
            max: 10.0,
            points: 41,
        }
    }
}

impl AlphaGrid {
    pub fn values(&self) -> Vec<f64> {
        alpha_grid(self.min, self.max, self.points)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    pub strategies: Vec<StrategyKind>,
    /// Empty means a single column at the model's own `mu`.
    #[serde(default)]
    pub mu: Vec<f64>,
    /// Cells run concurrently on this many threads.
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

fn default_jobs() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(model: &str) -> Self {
        ExperimentConfig {
            output_dir: default_output_dir(),
            seed: 0,
            model: ModelSection {
                name: model.to_string(),
                params: ModelParams::default(),
            },
            strategy: StrategySection::default(),
            integrator: IntegratorSection::default(),
            analysis: AnalysisSection::default(),
            sdc: None,
            bench: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Checks that do not touch the filesystem.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: &str| Err(CliError::Config(format!("{field}: {msg}")));
        if let Some(dt) = self.integrator.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad("integrator.dt", "must be positive");
            }
        }
        if let Some(t) = self.integrator.t_final {
            if !(t > 0.0 && t.is_finite()) {
                return bad("integrator.t_final", "must be positive");
            }
        }
        if self.analysis.residual_stride == 0 {
            return bad("analysis.residual_stride", "must be at least 1");
        }
        if !(self.analysis.divergence_threshold > 0.0) {
            return bad("analysis.divergence_threshold", "must be positive");
        }
        if !(self.strategy.nk_tol > 0.0) {
            return bad("strategy.nk_tol", "must be positive");
        }
        if let Some(sdc) = &self.sdc {
            let g = &sdc.alpha_grid;
            if g.points < 2 || !(g.min < g.max) {
                return bad("sdc.alpha_grid", "needs min < max and at least 2 points");
            }
            let [i1, j1, j2] = sdc.indices;
            ZPerturbation::from_one_based(i1, j1, j2)
                .map_err(|e| CliError::Config(format!("sdc.indices: {e}")))?;
        }
        if let Some(b) = &self.bench {
            if b.strategies.is_empty() {
                return bad("bench.strategies", "list is empty");
            }
            if b.jobs == 0 {
                return bad("bench.jobs", "must be at least 1");
            }
        }
        self.setup().map(|_| ())
    }

    /// Build the model, cost and integrator this config describes.
    pub fn setup(&self) -> Result<BuiltinSetup, CliError> {
        self.setup_with(&self.model.params)
    }

    pub fn setup_with(&self, params: &ModelParams) -> Result<BuiltinSetup, CliError> {
        let mut setup = builtin_model(&self.model.name, params).map_err(|e| match e {
            sdre::Error::UnknownModel(_) => CliError::Config(format!("model.name: {e}")),
            other => CliError::Config(format!("model.params: {other}")),
        })?;
        let i = &self.integrator;
        setup.integrator = IntegratorSpec {
            scheme: i.scheme.unwrap_or(setup.integrator.scheme),
            dt: i.dt.unwrap_or(setup.integrator.dt),
            t_final: i.t_final.unwrap_or(setup.integrator.t_final),
            implicit_part: setup.integrator.implicit_part.take(),
        };
        if setup.integrator.dt > setup.integrator.t_final {
            return Err(CliError::Config(format!(
                "integrator.dt: {} exceeds t_final {}",
                setup.integrator.dt, setup.integrator.t_final
            )));
        }
        Ok(setup)
    }

    /// Create the output directory and check it accepts files.
    pub fn prepare_output_dir(&self) -> Result<&Path, CliError> {
        let dir = self.output_dir.as_path();
        let unwritable =
            |e: std::io::Error| CliError::Config(format!("output_dir: {}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(unwritable)?;
        let probe = dir.join(".sdre-write-probe");
        fs::write(&probe, b"").map_err(unwritable)?;
        let _ = fs::remove_file(probe);
        Ok(dir)
    }
}

