//! Trainable models for the three supported task families and their inference.

mod encode;
mod linear;
mod logistic;
mod metrics;
mod recommender;
mod weights;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use encode::{encode, encoded_columns, identifier_columns, DesignMatrix, EncodedColumn, EncodedKind, Encoding};
pub use linear::{train_linear_regression, LinearModel};
pub use logistic::{log_loss_and_gradient, sigmoid, train_logistic_classifier, LogisticModel};
pub use metrics::{classification_metrics, regression_metrics, Metrics};
pub use recommender::{train_recommender, Interaction, RecommenderGradient, RecommenderModel};
pub use weights::{load_weights, read_weights, save_weights, write_weights, WEIGHTS_MAGIC};

#[derive(Debug, Error)]
pub enum MlError {
    #[error("too few rows: need at least {needed}, have {available}")]
    TooFewRows { needed: usize, available: usize },
    #[error("normal equations are singular even with ridge jitter")]
    SingularSystem,
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("target must be 0/1 for binary classification, found {0}")]
    NonBinaryTarget(f64),
    #[error("recommender needs at least 2 distinct users and 2 distinct items (have {users} users, {items} items)")]
    VocabTooSmall { users: usize, items: usize },
    #[error("expected {expected} features, got {actual}")]
    ArityMismatch { expected: usize, actual: usize },
    #[error("input contains a non-finite value")]
    NonFiniteInput,
    #[error("unknown user {0:?}")]
    UnknownUser(String),
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("every row was dropped during encoding ({dropped} rows had unusable cells)")]
    AllRowsDropped { dropped: usize },
    #[error("{0} models do not support this operation")]
    Unsupported(ModelKind),
    #[error("training produced non-finite weights")]
    Diverged,
    #[error("weights file format error: {0}")]
    Format(String),
    #[error("weights io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    BinaryClassification,
    Recommendation,
}

impl Task {
    pub fn default_algorithm(self) -> Algorithm {
        match self {
            Task::Regression => Algorithm::LinearRegression,
            Task::BinaryClassification => Algorithm::LogisticClassifier,
            Task::Recommendation => Algorithm::Recommender,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Regression => "regression",
            Task::BinaryClassification => "binary_classification",
            Task::Recommendation => "recommendation",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The training algorithms the engine can run on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    LinearRegression,
    LogisticClassifier,
    Recommender,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] =
        [Algorithm::LinearRegression, Algorithm::LogisticClassifier, Algorithm::Recommender];

    pub fn task(self) -> Task {
        match self {
            Algorithm::LinearRegression => Task::Regression,
            Algorithm::LogisticClassifier => Task::BinaryClassification,
            Algorithm::Recommender => Task::Recommendation,
        }
    }

    /// Registry token, also the word a user types to pick the algorithm.
    pub fn token(self) -> &'static str {
        match self {
            Algorithm::LinearRegression => "linear_regression",
            Algorithm::LogisticClassifier => "logistic_classifier",
            Algorithm::Recommender => "recommender",
        }
    }

    /// Human-readable algorithm type recorded in model profiles.
    pub fn display_name(self) -> &'static str {
        match self {
            Algorithm::LinearRegression => "Linear Regression",
            Algorithm::LogisticClassifier => "Logistic Regression Classifier",
            Algorithm::Recommender => {
                "Mixed Collaborative Filtering with Neural Networks (element-wise product embedding model)"
            }
        }
    }

    pub fn from_display_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.display_name() == name)
    }

    pub fn valid_tokens() -> String {
        Self::ALL.iter().map(|a| a.token()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        match t.as_str() {
            "linear_regression" | "linearregression" | "regressionmodel" | "regression" => {
                Ok(Algorithm::LinearRegression)
            }
            "logistic_classifier"
            | "logistic_regression"
            | "logisticregression"
            | "classificationmodel"
            | "classifier"
            | "classification" => Ok(Algorithm::LogisticClassifier),
            "recommender" | "recommendationmodel" | "recommendation" | "ncf" => Ok(Algorithm::Recommender),
            _ => Err(format!("unknown algorithm {s:?}; valid algorithms: {}", Self::valid_tokens())),
        }
    }
}

/// Hyperparameters for one training run. Unused fields are ignored by
/// algorithms that do not need them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub seed: u64,
    pub test_fraction: f64,
    pub ridge: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub embedding_dim: usize,
    pub init_std: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::for_algorithm(Algorithm::LinearRegression)
    }
}

impl TrainConfig {
    pub fn for_algorithm(algorithm: Algorithm) -> Self {
        let base = Self {
            seed: 42,
            test_fraction: 0.2,
            ridge: 1e-8,
            learning_rate: 0.0,
            epochs: 0,
            batch_size: 0,
            embedding_dim: 0,
            init_std: 0.0,
        };
        match algorithm {
            Algorithm::LinearRegression => base,
            Algorithm::LogisticClassifier => Self { learning_rate: 0.1, epochs: 500, ..base },
            Algorithm::Recommender => {
                Self { learning_rate: 0.05, epochs: 20, batch_size: 64, embedding_dim: 16, init_std: 0.1, ..base }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    LinearRegression,
    LogisticClassifier,
    Recommender,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::LinearRegression => "linear_regression",
            ModelKind::LogisticClassifier => "logistic_classifier",
            ModelKind::Recommender => "recommender",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Linear(LinearModel),
    Logistic(LogisticModel),
    Recommender(RecommenderModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Linear(_) => ModelKind::LinearRegression,
            TrainedModel::Logistic(_) => ModelKind::LogisticClassifier,
            TrainedModel::Recommender(_) => ModelKind::Recommender,
        }
    }

    pub fn train_config(&self) -> &TrainConfig {
        match self {
            TrainedModel::Linear(m) => &m.config,
            TrainedModel::Logistic(m) => &m.config,
            TrainedModel::Recommender(m) => &m.config,
        }
    }

    pub fn feature_order(&self) -> Option<&[String]> {
        match self {
            TrainedModel::Linear(m) => Some(&m.feature_order),
            TrainedModel::Logistic(m) => Some(&m.feature_order),
            TrainedModel::Recommender(_) => None,
        }
    }
}

/// Runs a feature-vector model: linear returns `w·x + b`, logistic returns
/// the positive-class probability.
pub fn predict(model: &TrainedModel, features: &[f64]) -> Result<f64, MlError> {
    let check = |expected: usize| {
        if features.len() != expected {
            return Err(MlError::ArityMismatch { expected, actual: features.len() });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(MlError::NonFiniteInput);
        }
        Ok(())
    };
    match model {
        TrainedModel::Linear(m) => {
            check(m.coefficients.len())?;
            Ok(m.predict(features))
        }
        TrainedModel::Logistic(m) => {
            check(m.coefficients.len())?;
            Ok(m.predict_proba(features))
        }
        TrainedModel::Recommender(_) => Err(MlError::Unsupported(ModelKind::Recommender)),
    }
}

/// Top-`k` unobserved items for `user_id`, by descending score then ascending item id.
pub fn recommend(model: &TrainedModel, user_id: &str, k: usize) -> Result<Vec<(String, f64)>, MlError> {
    match model {
        TrainedModel::Recommender(m) => m.recommend(user_id, k),
        other => Err(MlError::Unsupported(other.kind())),
    }
}

/// Seeded shuffle of `0..n` split into (train, test) with `ceil(n * test_fraction)`
/// test rows, keeping at least one row on each side when `n >= 2`.
pub(crate) fn split_indices(n: usize, test_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let mut n_test = (n as f64 * test_fraction).ceil() as usize;
    if n >= 2 {
        n_test = n_test.clamp(1, n - 1);
    } else {
        n_test = 0;
    }
    let train = idx.split_off(n_test);
    (train, idx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_tokens_parse() {
        for a in Algorithm::ALL {
            assert_eq!(a.token().parse::<Algorithm>().unwrap(), a);
            assert_eq!(Algorithm::from_display_name(a.display_name()), Some(a));
        }
        assert_eq!("RegressionModel".parse::<Algorithm>().unwrap(), Algorithm::LinearRegression);
        assert_eq!("ClassificationModel".parse::<Algorithm>().unwrap(), Algorithm::LogisticClassifier);
        let err = "quantum_forest".parse::<Algorithm>().unwrap_err();
        assert!(err.contains("linear_regression") && err.contains("recommender"));
    }

    #[test]
    fn split_is_seeded_and_disjoint() {
        let (tr, te) = split_indices(100, 0.2, 42);
        assert_eq!(te.len(), 20);
        assert_eq!(tr.len(), 80);
        let (tr2, te2) = split_indices(100, 0.2, 42);
        assert_eq!((tr.clone(), te.clone()), (tr2, te2));
        let mut all: Vec<usize> = tr.into_iter().chain(te).collect();
        all.sort();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert_eq!(split_indices(1, 0.2, 1).1.len(), 0);
        assert_eq!(split_indices(2, 0.2, 1).1.len(), 1);
    }

    #[test]
    fn linear_predict_by_definition() {
        let m = TrainedModel::Linear(LinearModel {
            feature_order: vec!["x".into()],
            coefficients: vec![2.0],
            intercept: 1.0,
            config: TrainConfig::default(),
        });
        assert_eq!(predict(&m, &[3.0]).unwrap(), 7.0);
        assert!(matches!(predict(&m, &[f64::NAN]), Err(MlError::NonFiniteInput)));
        assert!(matches!(predict(&m, &[1.0, 2.0]), Err(MlError::ArityMismatch { expected: 1, actual: 2 })));
    }
}
