//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{maximin_lhc, DEFAULT_RESTARTS};
use crate::engine::EmulatorPrior;
use crate::error::{Error, Result};
use crate::geometry::{validate_set, Boundary, BoundarySet, BoundarySpec};
use crate::kernel::{CorrelationKernel, KernelSpec};
use crate::testbed::{boundary_from_spec, three_d, Model};

/// Default number of scoping runs when the prior is estimated.
pub const DEFAULT_SCOPING_RUNS: usize = 100;

/// Prior mean and variance: given directly, or `"scoping:<n>"` for the
/// sample mean and variance of `n` runs on a maximin design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PriorConfig {
    Fixed { beta: f64, sigma2: f64 },
    /// `beta` from `"scoping:<n>"` runs, `sigma2` given.
    ScopingMean { beta: String, sigma2: f64 },
    Scoping(String),
}

impl PriorConfig {
    pub fn scoping_runs(&self) -> Result<Option<usize>> {
        match self {
            PriorConfig::Fixed { .. } => Ok(None),
            PriorConfig::ScopingMean { beta: s, .. } | PriorConfig::Scoping(s) => {
                let n = s
                    .strip_prefix("scoping:")
                    .ok_or_else(|| Error::Config(format!("prior must be {{beta, sigma2}} or \"scoping:<n>\", got `{s}`")))?;
                let n: usize = n
                    .parse()
                    .map_err(|_| Error::Config(format!("bad scoping run count `{n}`")))?;
                if n < 2 {
                    return Err(Error::Config("scoping needs at least 2 runs".into()));
                }
                Ok(Some(n))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub n: usize,
    pub seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

fn default_restarts() -> usize {
    DEFAULT_RESTARTS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticConfig {
    pub n_test: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// Number of prediction targets, `n_B`.
    pub n_targets: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    /// Full kernel; overrides `theta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    /// Common lengthscale in every input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorConfig>,
    #[serde(default)]
    pub boundaries: Vec<String>,
    /// Boundaries beyond the model's builtin ones.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_boundaries: Vec<BoundarySpec>,
    pub design: DesignConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<DiagnosticConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub theta_sweep: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub train_sweep: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundary_sweep: Vec<Vec<String>>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Directory relative paths resolve against; set on load.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// Minimal config for a model with its default prior.
    pub fn for_model(model: Model) -> Self {
        ExperimentConfig {
            model,
            kernel: None,
            theta: None,
            prior: None,
            boundaries: Vec::new(),
            extra_boundaries: Vec::new(),
            design: DesignConfig {
                n: 10,
                seed: 1,
                restarts: DEFAULT_RESTARTS,
            },
            diagnostic: None,
            oracle: None,
            theta_sweep: Vec::new(),
            train_sweep: Vec::new(),
            boundary_sweep: Vec::new(),
            output_dir: default_output_dir(),
            base_dir: PathBuf::from("."),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        if let Some(t) = self.theta {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Config(format!("theta must be positive, got {t}")));
            }
        }
        if let Some(t) = self.theta_sweep.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::Config(format!("theta sweep values must be positive, got {t}")));
        }
        if let Some(pc) = &self.prior {
            pc.scoping_runs()?;
        }
        for labels in std::iter::once(&self.boundaries).chain(&self.boundary_sweep) {
            self.boundaries_by_label(labels)?;
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn p(&self) -> usize {
        self.model.dim()
    }

    /// Kernel with lengthscale `theta` if given, else from the config.
    pub fn kernel_with(&self, theta: Option<f64>) -> Result<CorrelationKernel> {
        let p = self.p();
        let k = match (theta, &self.kernel, self.theta) {
            (Some(t), _, _) => CorrelationKernel::isotropic(p, t)?,
            (None, Some(spec), _) => CorrelationKernel::try_from(spec.clone())?,
            (None, None, Some(t)) => CorrelationKernel::isotropic(p, t)?,
            (None, None, None) => match self.model {
                Model::ThreeD => three_d::prior_3d().kernel().clone(),
                Model::Arabidopsis => {
                    return Err(Error::Config("no kernel or theta given".into()));
                }
            },
        };
        if k.dim() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: k.dim(),
            });
        }
        Ok(k)
    }

    /// `(beta, sigma2)` from the config, running scoping runs if asked.
    pub fn prior_moments(&self) -> Result<(f64, f64)> {
        match &self.prior {
            Some(PriorConfig::Fixed { beta, sigma2 }) => Ok((*beta, *sigma2)),
            Some(pc @ PriorConfig::ScopingMean { sigma2, .. }) => {
                let n = pc.scoping_runs()?.expect("scoping prior");
                let (beta, _) = scoping_moments(self.model, n, self.design.seed ^ SCOPING_SEED_MIX)?;
                Ok((beta, *sigma2))
            }
            Some(pc @ PriorConfig::Scoping(_)) => {
                let n = pc.scoping_runs()?.expect("scoping prior");
                scoping_moments(self.model, n, self.design.seed ^ SCOPING_SEED_MIX)
            }
            None => match self.model {
                Model::ThreeD => {
                    let p = three_d::prior_3d();
                    Ok((p.beta(), p.sigma2()))
                }
                Model::Arabidopsis => {
                    scoping_moments(self.model, DEFAULT_SCOPING_RUNS, self.design.seed ^ SCOPING_SEED_MIX)
                }
            },
        }
    }

    pub fn prior_with(&self, theta: Option<f64>) -> Result<EmulatorPrior> {
        let (beta, sigma2) = self.prior_moments()?;
        EmulatorPrior::new(beta, sigma2, self.kernel_with(theta)?)
    }

    /// Named boundaries in the given order, from the model or the extras.
    pub fn boundaries_by_label(&self, labels: &[String]) -> Result<Vec<Boundary>> {
        let builtin = self.model.boundaries();
        labels
            .iter()
            .map(|l| {
                if let Some(b) = builtin.iter().find(|b| b.label() == l) {
                    return Ok(b.clone());
                }
                let spec = self
                    .extra_boundaries
                    .iter()
                    .find(|s| &s.label == l)
                    .ok_or_else(|| Error::Config(format!("unknown boundary `{l}` for this model")))?;
                boundary_from_spec(spec, self.p(), &self.base_dir)
            })
            .collect()
    }

    pub fn boundary_set(&self, labels: &[String]) -> Result<BoundarySet> {
        validate_set(self.boundaries_by_label(labels)?)
    }
}

/// Mixed into the design seed for the scoping design.
pub const SCOPING_SEED_MIX: u64 = 0x5c0b_1e55;

/// Sample mean and (unbiased) variance of `n` runs on a maximin design.
pub fn scoping_moments(model: Model, n: usize, seed: u64) -> Result<(f64, f64)> {
    let design = maximin_lhc(n, model.dim(), seed, DEFAULT_RESTARTS)?;
    let ys = design
        .scaled(&model.domain())?
        .iter()
        .map(|x| model.evaluate(x))
        .collect::<Result<Vec<_>>>()?;
    let mean = ys.iter().sum::<f64>() / n as f64;
    let var = ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / (n - 1) as f64;
    Ok((mean, var))
}

/// Split a comma list such as `K,L,M`; an empty string is the empty set.
pub fn parse_labels(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect()
}
