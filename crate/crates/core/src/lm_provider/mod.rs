//! Natural-language understanding behind one interface: intent routing,
//! preprocessing detection, column selection and value extraction.
//!
//! [`RuleBasedProvider`] is deterministic and needs no network.
//! [`RemoteProvider`] asks an HTTP service for the same structures and falls
//! back to the rules whenever the answer is missing or invalid.

mod remote;
pub(crate) mod rules;
pub mod text;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Target;
use crate::ml_engine::{Algorithm, Task};
use crate::table::ColumnMeta;

pub use remote::{RemoteConfig, RemoteProvider};
pub use rules::{find_algorithm, RuleBasedProvider};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intent {
    Query,
    Confirm,
    Change,
    Selection,
    Guide,
    Chat,
}

impl Intent {
    pub const ALL: [Intent; 6] =
        [Intent::Query, Intent::Confirm, Intent::Change, Intent::Selection, Intent::Guide, Intent::Chat];

    pub fn as_str(self) -> &'static str {
        match self {
            Intent::Query => "query",
            Intent::Confirm => "confirm",
            Intent::Change => "change",
            Intent::Selection => "selection",
            Intent::Guide => "guide",
            Intent::Chat => "chat",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|i| i.as_str() == s.trim().trim_matches('"').to_lowercase())
    }
}

impl fmt::Display for Intent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Columns picked for training. For recommendation `features` is
/// `[user_col, item_col]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSelection {
    pub task: Task,
    pub features: Vec<String>,
    pub target: Target,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProviderError {
    #[error("no column matches {0:?}")]
    NoTargetMatch(String),
    #[error("could not find a value for: {}", .0.join(", "))]
    MissingFeature(Vec<String>),
    #[error("no user id found in the request")]
    NoUserId,
    #[error("remote provider: {0}")]
    Remote(String),
}

pub trait LanguageProvider: Send + Sync {
    fn classify_intent(&self, message: &str) -> Intent;

    /// Whether the query restricts which rows to use.
    fn needs_preprocessing(&self, query: &str) -> bool;

    /// `columns` are encoded names for regression and classification, raw
    /// names for recommendation.
    fn select_columns(&self, query: &str, columns: &[String], task: Task) -> Result<ColumnSelection, ProviderError>;

    /// One value per entry of `feature_order`, in that order. `columns`
    /// describes the raw dataset columns the features were encoded from.
    fn extract_feature_values(
        &self,
        query: &str,
        feature_order: &[String],
        columns: &[ColumnMeta],
    ) -> Result<Vec<f64>, ProviderError>;

    fn extract_user_id(&self, query: &str) -> Result<String, ProviderError>;

    /// The training algorithm named in `message`, if any.
    fn find_algorithm(&self, message: &str) -> Option<Algorithm> {
        find_algorithm(message)
    }
}
