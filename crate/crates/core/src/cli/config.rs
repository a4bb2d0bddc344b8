use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Bounds, HessianConvention, MomentModel, Weighting};
use crate::models::{ma1_moment_model, CubeRootModel, GaussianModel, Ma1Model, Ma1Spec, Ma1Weighting};
use crate::numerics::Vector;
use crate::optimizers::{Method, OptimizerConfig};
use crate::quasirandom::box_candidates;

/// One experiment: a model, how to start and run the optimizers, and where
/// to write the results.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub optimizer: OptimizerConfig,
    /// Methods for `compare`; all of them when empty.
    pub methods: Vec<Method>,
    pub starts: StartConfig,
    pub grid: GridConfig,
    pub convention: HessianConvention,
    pub output_dir: Option<PathBuf>,
    pub recipe: Option<String>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    /// p = 1 MA(1) whose auxiliary estimate puts the root at `theta_hat`.
    Ma1Calibrated {
        #[serde(default = "default_theta_hat")]
        theta_hat: f64,
    },
    /// Simulated MA(1) sample with an AR(p) auxiliary model.
    Ma1 {
        #[serde(default = "default_theta_true")]
        theta_true: f64,
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_p")]
        p: usize,
        #[serde(default = "default_seed")]
        seed: u64,
        #[serde(default)]
        weighting: Ma1Weighting,
    },
    /// Population Gaussian mean, variance and fourth-moment matching.
    Gaussian {
        #[serde(default)]
        mu: f64,
        #[serde(default = "default_sigma2")]
        sigma2: f64,
    },
    CubeRoot {
        #[serde(default)]
        ybar: f64,
    },
}

fn default_theta_hat() -> f64 {
    -0.339
}
fn default_theta_true() -> f64 {
    -0.5
}
fn default_n() -> usize {
    200
}
fn default_p() -> usize {
    12
}
fn default_seed() -> u64 {
    2
}
fn default_sigma2() -> f64 {
    1.0
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::Ma1Calibrated {
            theta_hat: default_theta_hat(),
        }
    }
}

pub const MODEL_KINDS: [&str; 4] = ["ma1-calibrated", "ma1", "gaussian", "cube-root"];

impl ModelConfig {
    /// The default configuration of a model kind.
    pub fn of_kind(kind: &str) -> Result<Self> {
        Ok(match kind {
            "ma1-calibrated" => ModelConfig::default(),
            "ma1" => ModelConfig::Ma1 {
                theta_true: default_theta_true(),
                n: default_n(),
                p: default_p(),
                seed: default_seed(),
                weighting: Ma1Weighting::default(),
            },
            "gaussian" => ModelConfig::Gaussian {
                mu: 0.0,
                sigma2: default_sigma2(),
            },
            "cube-root" => ModelConfig::CubeRoot { ybar: 0.0 },
            other => {
                return Err(Error::Config(format!(
                    "unknown model {other:?}; available: {}",
                    MODEL_KINDS.join(", ")
                )))
            }
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ModelConfig::Ma1Calibrated { .. } => "ma1-calibrated",
            ModelConfig::Ma1 { .. } => "ma1",
            ModelConfig::Gaussian { .. } => "gaussian",
            ModelConfig::CubeRoot { .. } => "cube-root",
        }
    }

    pub fn build(&self) -> Result<BuiltModel> {
        Ok(match *self {
            ModelConfig::Ma1Calibrated { theta_hat } => BuiltModel {
                model: Box::new(Ma1Model::calibrated(theta_hat)?),
                weighting: Weighting::identity(1),
                series: None,
            },
            ModelConfig::Ma1 {
                theta_true,
                n,
                p,
                seed,
                weighting,
            } => {
                let spec = Ma1Spec { theta_true, n, p, seed };
                let inst = ma1_moment_model(&spec, weighting)?;
                BuiltModel {
                    model: Box::new(inst.model),
                    weighting: inst.weighting,
                    series: Some(inst.series),
                }
            }
            ModelConfig::Gaussian { mu, sigma2 } => BuiltModel {
                model: Box::new(GaussianModel::population(mu, sigma2)?),
                weighting: Weighting::identity(3),
                series: None,
            },
            ModelConfig::CubeRoot { ybar } => BuiltModel {
                model: Box::new(CubeRootModel::try_new(ybar)?),
                weighting: Weighting::identity(1),
                series: None,
            },
        })
    }
}

pub struct BuiltModel {
    pub model: Box<dyn MomentModel>,
    pub weighting: Weighting,
    /// The simulated sample, for simulation-based models.
    pub series: Option<Vec<f64>>,
}

/// Explicit starting points, or shifted Sobol points in a box.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StartConfig {
    pub points: Option<Vec<Vec<f64>>>,
    pub sobol: Option<SobolStarts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SobolStarts {
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    /// The model's bounds when absent.
    #[serde(default)]
    pub lower: Option<Vec<f64>>,
    #[serde(default)]
    pub upper: Option<Vec<f64>>,
}

impl StartConfig {
    pub fn resolve(&self, bounds: &Bounds) -> Result<Vec<Vector>> {
        let starts = match (&self.points, &self.sobol) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either start points or sobol starts, not both".into()))
            }
            (Some(points), None) => points.iter().map(|p| Vector::from_column_slice(p)).collect(),
            (None, Some(s)) => {
                if s.count == 0 {
                    return Err(Error::Config("sobol start count must be positive".into()));
                }
                box_candidates(&box_or(bounds, &s.lower, &s.upper)?, s.count, s.seed)?
            }
            (None, None) => return Err(Error::Config("no starting points given".into())),
        };
        if starts.is_empty() {
            return Err(Error::Config("empty start list".into()));
        }
        if let Some(bad) = starts.iter().find(|s| s.len() != bounds.dim()) {
            return Err(Error::Config(format!(
                "start {:?} has dimension {}, model has {}",
                bad.as_slice(),
                bad.len(),
                bounds.dim()
            )));
        }
        Ok(starts)
    }
}

/// Grid for `rank-grid` and `convexity-map`: explicit nodes, or a uniform grid
/// on a box (the model's bounds by default).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub per_axis: Option<usize>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    pub nodes: Option<Vec<Vec<f64>>>,
    /// Over-identified pair grid even when the model is just identified.
    pub pairs: bool,
}

impl GridConfig {
    pub fn resolve(&self, bounds: &Bounds) -> Result<Vec<Vector>> {
        let grid: Vec<Vector> = match &self.nodes {
            Some(nodes) => nodes.iter().map(|p| Vector::from_column_slice(p)).collect(),
            None => {
                let b = box_or(bounds, &self.lower, &self.upper)?;
                let per_axis = self
                    .per_axis
                    .unwrap_or_else(|| crate::diagnostics::default_per_axis(b.dim()));
                crate::baselines::uniform_grid(&b, per_axis)?
            }
        };
        if grid.is_empty() {
            return Err(Error::Config("empty grid".into()));
        }
        if grid.iter().any(|t| t.len() != bounds.dim()) {
            return Err(Error::Config("grid node dimension does not match the model".into()));
        }
        Ok(grid)
    }
}

fn box_or(bounds: &Bounds, lower: &Option<Vec<f64>>, upper: &Option<Vec<f64>>) -> Result<Bounds> {
    let lo = lower.clone().unwrap_or_else(|| bounds.lower().iter().copied().collect());
    let hi = upper.clone().unwrap_or_else(|| bounds.upper().iter().copied().collect());
    if lo.len() != bounds.dim() || hi.len() != bounds.dim() {
        return Err(Error::Config(format!("box must have dimension {}", bounds.dim())));
    }
    Bounds::from_slices(&lo, &hi).map_err(|e| Error::Config(e.to_string()))
}
