//! Experiment configuration: a JSON document selecting a dataset, a loss,
//! solver and sampling parameters, and an output format.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sets_clustering::Loss;

use crate::error::{HarnessError, Result};

/// What the experiment runner should do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Sweep coreset sizes, solve heuristically, compare against the
    /// full-data solve.
    ExperimentI,
    /// Growing data prefixes, exact single-center oracle on coresets versus
    /// the full prefix.
    ExperimentIi,
    /// One heuristic solve of the dataset per trial.
    SingleSolve,
}

/// Where the input family comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum DatasetSpec {
    /// Grouped CSV of rows `set_id,x_1,…,x_d`.
    File {
        path: PathBuf,
        #[serde(default)]
        dim: Option<usize>,
    },
    /// Two far-apart rings of near/far point pairs.
    TwoCircles { n1: usize, n2: usize, r: f64 },
}

/// Loss selection with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LossSpec {
    Median,
    Means,
    Huber {
        #[serde(default = "default_huber_delta")]
        delta: f64,
    },
    Lpsi {
        #[serde(default = "default_psi")]
        psi: f64,
    },
}

impl LossSpec {
    /// The core loss this choice names.
    pub fn to_loss(&self) -> Result<Loss> {
        let loss = match *self {
            LossSpec::Median => Loss::median(),
            LossSpec::Means => Loss::means(),
            LossSpec::Huber { delta } => Loss::huber(delta)?,
            LossSpec::Lpsi { psi } => Loss::lpsi(psi)?,
        };
        Ok(loss)
    }
}

fn default_huber_delta() -> f64 {
    1.0
}

fn default_psi() -> f64 {
    1.0
}

/// Output table format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Full description of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub dataset: DatasetSpec,
    #[serde(default = "default_loss")]
    pub loss: LossSpec,
    pub k: usize,
    /// Coreset sizes (experiment-i) or prefix sizes (experiment-ii). Empty
    /// means the default sweep 20,30,…,140, scaled down when it overshoots
    /// half the data.
    #[serde(default)]
    pub sigmas: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub b_sens: Option<f64>,
    #[serde(default)]
    pub b_stop: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: ReportFormat,
    /// When false every wall_time_seconds is 0.0, making reports
    /// byte-reproducible.
    #[serde(default = "default_record_timing")]
    pub record_timing: bool,
}

fn default_loss() -> LossSpec {
    LossSpec::Means
}

fn default_trials() -> usize {
    1
}

fn default_max_iters() -> usize {
    12
}

fn default_restarts() -> usize {
    8
}

fn default_tau() -> f64 {
    1.0 / 6.0
}

fn default_format() -> ReportFormat {
    ReportFormat::Csv
}

fn default_record_timing() -> bool {
    true
}

impl ExperimentConfig {
    /// Parses a JSON config document.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Structural checks that do not need the dataset.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(HarnessError::Invalid("k must be >= 1".into()));
        }
        if self.trials == 0 {
            return Err(HarnessError::Invalid("trials must be >= 1".into()));
        }
        if self.restarts == 0 {
            return Err(HarnessError::Invalid("restarts must be >= 1".into()));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(HarnessError::Invalid(format!(
                "tau must lie in (0, 1), got {}",
                self.tau
            )));
        }
        if let DatasetSpec::TwoCircles { n1, n2, .. } = self.dataset {
            if n1 == 0 || n2 == 0 {
                return Err(HarnessError::Invalid(
                    "two-circles groups must both be nonempty".into(),
                ));
            }
        }
        self.loss.to_loss()?;
        Ok(())
    }

    /// Sigma sweep for a dataset of n sets: the configured list, or the
    /// default 20,30,…,140 sweep rescaled proportionally so its largest value
    /// stays at or below n/2 (never below 1), duplicates dropped.
    pub fn resolved_sigmas(&self, n: usize) -> Result<Vec<usize>> {
        if !self.sigmas.is_empty() {
            for &s in &self.sigmas {
                if s == 0 || s > n {
                    return Err(HarnessError::Invalid(format!(
                        "sigma {s} is outside [1, {n}]"
                    )));
                }
            }
            return Ok(self.sigmas.clone());
        }
        let sweep: Vec<usize> = (2..=14).map(|i| i * 10).collect();
        let cap = (n / 2).max(1);
        let scale = if 140 > cap { cap as f64 / 140.0 } else { 1.0 };
        let mut out = Vec::new();
        for s in sweep {
            let scaled = ((s as f64 * scale).floor() as usize).clamp(1, n);
            if out.last() != Some(&scaled) {
                out.push(scaled);
            }
        }
        Ok(out)
    }
}
