//! Engine settings. Every field has a default, so an empty TOML document is a
//! valid configuration.

use std::path::PathBuf;

use serde::Deserialize;
use thiserror::Error;

use crate::embedding::EncoderConfig;
use crate::lm_provider::RemoteConfig;
use crate::ml_engine::{Algorithm, TrainConfig};

pub const DEFAULT_TAU_MODEL: f64 = 0.35;
pub const DEFAULT_TAU_DATASET: f64 = 0.20;
pub const DEFAULT_RECOMMEND_K: usize = 5;

#[derive(Debug, Error)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub tau_model: f64,
    pub tau_dataset: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { tau_model: DEFAULT_TAU_MODEL, tau_dataset: DEFAULT_TAU_DATASET }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default)]
pub struct TrainingDefaults {
    pub linear_regression: TrainConfig,
    pub logistic_classifier: TrainConfig,
    pub recommender: TrainConfig,
}

impl Default for TrainingDefaults {
    fn default() -> Self {
        Self {
            linear_regression: TrainConfig::for_algorithm(Algorithm::LinearRegression),
            logistic_classifier: TrainConfig::for_algorithm(Algorithm::LogisticClassifier),
            recommender: TrainConfig::for_algorithm(Algorithm::Recommender),
        }
    }
}

impl TrainingDefaults {
    pub fn get(&self, algorithm: Algorithm) -> &TrainConfig {
        match algorithm {
            Algorithm::LinearRegression => &self.linear_regression,
            Algorithm::LogisticClassifier => &self.logistic_classifier,
            Algorithm::Recommender => &self.recommender,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderMode {
    #[default]
    RuleBased,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    pub mode: ProviderMode,
    pub remote: RemoteConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// `None` keeps everything in memory.
    pub data_dir: Option<PathBuf>,
    pub embedding: EncoderConfig,
    pub thresholds: Thresholds,
    pub training: TrainingDefaults,
    pub provider: ProviderConfig,
    pub recommend_k: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            data_dir: None,
            embedding: EncoderConfig::default(),
            thresholds: Thresholds::default(),
            training: TrainingDefaults::default(),
            provider: ProviderConfig::default(),
            recommend_k: DEFAULT_RECOMMEND_K,
        }
    }
}

impl EngineConfig {
    pub fn with_data_dir(data_dir: impl Into<PathBuf>) -> Self {
        Self { data_dir: Some(data_dir.into()), ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.embedding.validate().map_err(|e| ConfigError(e.to_string()))?;
        for (name, t) in [("tau_model", self.thresholds.tau_model), ("tau_dataset", self.thresholds.tau_dataset)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(ConfigError(format!("{name} must be within [0, 1], got {t}")));
            }
        }
        if self.recommend_k == 0 {
            return Err(ConfigError("recommend_k must be positive".into()));
        }
        if self.provider.mode == ProviderMode::Remote && self.provider.remote.endpoint.is_empty() {
            return Err(ConfigError("remote provider needs an endpoint".into()));
        }
        for a in Algorithm::ALL {
            let t = self.training.get(a);
            if !(0.0..1.0).contains(&t.test_fraction) {
                return Err(ConfigError(format!("{}: test_fraction must be within [0, 1)", a.token())));
            }
        }
        Ok(())
    }
}
