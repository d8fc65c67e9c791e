//! Experiment configuration. The JSON shape matches the field names below
//! exactly; unknown fields are rejected so typos cannot silently change an
//! experiment.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::{AlgorithmConfig, AlgorithmKind};
use crate::mcsolve::{SchemeKind, DEFAULT_ABSORB, DEFAULT_MAX_STEPS};
use crate::sigmodel::InputModel;

use super::HarnessError;

/// One algorithm to run, with its named parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmEntry {
    pub algorithm: AlgorithmKind,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

/// How many walks the Monte Carlo solver runs at each ladder point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", deny_unknown_fields)]
pub enum WalksPolicy {
    /// Walks per unknown equal the ladder value itself, mirroring the
    /// iteration counts of the adaptive baselines.
    #[serde(rename = "LADDER")]
    Ladder,
    /// The same fixed walk count at every ladder point.
    #[serde(rename = "FIXED")]
    Fixed { walks: u64 },
}

/// Monte Carlo solver settings for identification runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcSettings {
    #[serde(default = "default_scheme")]
    pub scheme: SchemeKind,
    #[serde(default = "default_absorb")]
    pub absorb: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_policy")]
    pub walks_per_point: WalksPolicy,
}

fn default_scheme() -> SchemeKind {
    SchemeKind::Uniform
}

fn default_absorb() -> f64 {
    DEFAULT_ABSORB
}

fn default_max_steps() -> usize {
    DEFAULT_MAX_STEPS
}

fn default_policy() -> WalksPolicy {
    WalksPolicy::Ladder
}

impl Default for McmcSettings {
    fn default() -> Self {
        Self {
            scheme: default_scheme(),
            absorb: default_absorb(),
            max_steps: default_max_steps(),
            walks_per_point: default_policy(),
        }
    }
}

/// Where `R` and `b` come from: the closed forms of the input model, or
/// estimates over a finite sample stream.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", deny_unknown_fields)]
pub enum CorrelationSource {
    #[serde(rename = "EXACT")]
    #[default]
    Exact,
    #[serde(rename = "EMPIRICAL")]
    Empirical { n_samples: usize },
}

/// A full identification experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// True plant impulse response.
    pub plant_h: Vec<f64>,
    pub input_model: InputModel,
    pub algorithms: Vec<AlgorithmEntry>,
    #[serde(default = "default_ladder")]
    pub iteration_ladder: Vec<u64>,
    #[serde(default)]
    pub mcmc: McmcSettings,
    pub seed: u64,
    #[serde(default)]
    pub correlation_source: CorrelationSource,
    /// Run the Monte Carlo solver even if the precheck says divergent.
    #[serde(default)]
    pub force: bool,
}

fn default_ladder() -> Vec<u64> {
    vec![2, 4, 8, 16, 32, 64]
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self, HarnessError> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.plant_h.is_empty() {
            return Err(HarnessError::Config("plant_h must be non-empty".to_string()));
        }
        if self.plant_h.iter().any(|v| !v.is_finite()) {
            return Err(HarnessError::Config(
                "plant_h must contain only finite values".to_string(),
            ));
        }
        self.input_model
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.algorithms.is_empty() {
            return Err(HarnessError::Config(
                "algorithms must list at least one entry".to_string(),
            ));
        }
        let mut seen = Vec::new();
        for entry in &self.algorithms {
            if seen.contains(&entry.algorithm) {
                return Err(HarnessError::Config(format!(
                    "algorithm {} listed twice",
                    entry.algorithm
                )));
            }
            seen.push(entry.algorithm);
            if entry.algorithm == AlgorithmKind::Mcmc {
                if !entry.params.is_empty() {
                    return Err(HarnessError::Config(
                        "MCMC takes its settings from the `mcmc` block, not `params`".to_string(),
                    ));
                }
            } else {
                AlgorithmConfig::from_params(entry.algorithm, &entry.params)?;
            }
        }
        if self.iteration_ladder.is_empty() {
            return Err(HarnessError::Config(
                "iteration_ladder must be non-empty".to_string(),
            ));
        }
        if self.iteration_ladder[0] < 1 {
            return Err(HarnessError::Config(
                "iteration_ladder entries must be at least 1".to_string(),
            ));
        }
        if self
            .iteration_ladder
            .windows(2)
            .any(|pair| pair[1] <= pair[0])
        {
            return Err(HarnessError::Config(
                "iteration_ladder must be strictly increasing".to_string(),
            ));
        }
        if !(self.mcmc.absorb > 0.0 && self.mcmc.absorb < 1.0) {
            return Err(HarnessError::Config(format!(
                "mcmc.absorb must lie in (0, 1), got {}",
                self.mcmc.absorb
            )));
        }
        if self.mcmc.max_steps < 1 {
            return Err(HarnessError::Config(
                "mcmc.max_steps must be at least 1".to_string(),
            ));
        }
        if let WalksPolicy::Fixed { walks } = self.mcmc.walks_per_point {
            if walks < 1 {
                return Err(HarnessError::Config(
                    "mcmc.walks_per_point.walks must be at least 1".to_string(),
                ));
            }
        }
        Ok(())
    }

    /// Baseline entries in declaration order.
    pub fn baseline_entries(&self) -> impl Iterator<Item = &AlgorithmEntry> {
        self.algorithms
            .iter()
            .filter(|e| e.algorithm != AlgorithmKind::Mcmc)
    }

    pub fn includes_mcmc(&self) -> bool {
        self.algorithms
            .iter()
            .any(|e| e.algorithm == AlgorithmKind::Mcmc)
    }

    pub fn ladder_max(&self) -> u64 {
        *self.iteration_ladder.last().expect("validated non-empty")
    }
}
