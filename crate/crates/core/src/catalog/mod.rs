//! Data lake and model zoo: ingested datasets, trained models, their profile
//! texts and the vector index over those profiles.
//!
//! A catalog is either purely in memory or backed by a data directory laid
//! out as
//!
//! ```text
//! datasets/<name>/raw.csv, profile.txt
//! models/<name>/weights.bin, card.json, profile.txt
//! index/models.idx, datasets.idx
//! ```
//!
//! Each entry's last file (`profile.txt` for datasets, `card.json` for models)
//! is written after the others, so a directory missing it is an interrupted
//! write and is skipped on open.

pub mod naming;
pub mod profile;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{Embedding, EmbeddingError, Encoder};
use crate::fsutil::write_atomic;
use crate::ml_engine::{load_weights, save_weights, Algorithm, Metrics, MlError, Task, TrainedModel};
use crate::table::{ColumnMeta, Table, TableError};
use crate::vector_index::{EntityKind, EntityRecord, IndexError, RetrievalHit, VectorIndex};

pub use naming::{base_model_name, generate_model_name, MAX_MODEL_NAME_LEN};
pub use profile::{
    default_limitations, parse_dataset_name, parse_model_profile, py_list, py_str, quoted_strings,
    render_dataset_profile, render_model_profile, round_metric, ParsedModelProfile,
};

/// Number of leading rows kept in a dataset profile.
pub const SAMPLE_ROWS: usize = 10;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("name {0:?} is already taken")]
    DuplicateName(String),
    #[error("unknown dataset {0:?}")]
    UnknownDataset(String),
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    #[error("invalid name {0:?}: use 1-64 letters, digits, '_', '-' or '.', not starting with '.'")]
    InvalidName(String),
    #[error("invalid model card: {0}")]
    InvalidCard(String),
    #[error("profile format error: {0}")]
    ProfileFormat(String),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error("catalog io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("catalog metadata error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetProfile {
    pub name: String,
    pub columns: Vec<ColumnMeta>,
    pub row_count: usize,
    pub sample_rows: Vec<Vec<String>>,
    pub profile_text: String,
    /// Raw CSV location relative to the data directory.
    pub file_path: String,
}

/// What a model predicts: one target column, or user/item columns of an
/// interaction log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Target {
    Column(String),
    Interaction { user_col: String, item_col: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCard {
    pub name: String,
    pub dataset_name: String,
    pub task: Task,
    pub algorithm: Algorithm,
    /// Encoded feature names the model expects, in input order. For
    /// recommenders, `[user_col, item_col]`.
    pub feature_order: Vec<String>,
    pub target: Target,
    pub metrics: Metrics,
    pub limitations: String,
    /// Weights location relative to the data directory.
    pub weights_path: String,
    pub created_at: DateTime<Utc>,
    #[serde(skip)]
    pub profile_text: String,
    /// The request the model was trained for.
    #[serde(default)]
    pub query: String,
    #[serde(default)]
    pub training_rows: usize,
    /// Row filter applied before training, as readable text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<String>,
}

impl ModelCard {
    fn validate(&self) -> Result<(), CatalogError> {
        let bad = |m: String| Err(CatalogError::InvalidCard(m));
        if self.feature_order.is_empty() {
            return bad("feature_order is empty".into());
        }
        let unique: BTreeSet<&String> = self.feature_order.iter().collect();
        if unique.len() != self.feature_order.len() {
            return bad("feature_order has duplicates".into());
        }
        if let Target::Column(t) = &self.target {
            if self.feature_order.contains(t) {
                return bad(format!("target {t:?} is also a feature"));
            }
        }
        if self.algorithm.task() != self.task {
            return bad(format!("algorithm {} does not solve {}", self.algorithm.token(), self.task.as_str()));
        }
        let expected: &[&str] = match self.task {
            Task::Regression => &["mse", "r2"],
            Task::BinaryClassification | Task::Recommendation => &["accuracy", "precision", "recall"],
        };
        let keys: Vec<&str> = self.metrics.keys().map(String::as_str).collect();
        let mut want = expected.to_vec();
        want.sort_unstable();
        if keys != want {
            return bad(format!("metrics {keys:?} do not match {want:?}"));
        }
        if self.metrics.values().any(|v| !v.is_finite()) {
            return bad("non-finite metric".into());
        }
        Ok(())
    }
}

struct DatasetEntry {
    profile: DatasetProfile,
    table: Arc<Table>,
}

struct ModelEntry {
    card: ModelCard,
    model: Arc<TrainedModel>,
}

pub struct Catalog {
    root: Option<PathBuf>,
    encoder: Arc<dyn Encoder>,
    index: VectorIndex,
    datasets: BTreeMap<String, DatasetEntry>,
    models: BTreeMap<String, ModelEntry>,
}

pub fn validate_name(name: &str) -> Result<(), CatalogError> {
    let ok = !name.is_empty()
        && name.len() <= 64
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok {
        Ok(())
    } else {
        Err(CatalogError::InvalidName(name.to_string()))
    }
}

fn dataset_profile(name: &str, table: &Table, file_path: String) -> DatasetProfile {
    let mut p = DatasetProfile {
        name: name.to_string(),
        columns: table.infer_schema(),
        row_count: table.len(),
        sample_rows: table.rows.iter().take(SAMPLE_ROWS).cloned().collect(),
        profile_text: String::new(),
        file_path,
    };
    p.profile_text = render_dataset_profile(&p);
    p
}

impl Catalog {
    pub fn in_memory(encoder: Arc<dyn Encoder>) -> Self {
        Self {
            root: None,
            index: VectorIndex::new(encoder.dimension()),
            encoder,
            datasets: BTreeMap::new(),
            models: BTreeMap::new(),
        }
    }

    /// Opens (creating if needed) a catalog stored under `root`.
    ///
    /// The saved index is used when it holds exactly the stored entities at
    /// the encoder's dimension; otherwise every profile is embedded again.
    pub fn open(root: &Path, encoder: Arc<dyn Encoder>) -> Result<Self, CatalogError> {
        for sub in ["datasets", "models", "index", "sessions"] {
            fs::create_dir_all(root.join(sub))?;
        }
        let mut cat = Self::in_memory(encoder);
        cat.root = Some(root.to_path_buf());

        for dir in sorted_subdirs(&root.join("datasets"))? {
            let name = file_name(&dir);
            let (Ok(raw), Ok(text)) = (fs::read(dir.join("raw.csv")), fs::read_to_string(dir.join("profile.txt")))
            else {
                tracing::warn!(dataset = %name, "skipping incomplete dataset directory");
                continue;
            };
            let table = Table::from_csv(raw.as_slice())?;
            let mut profile = dataset_profile(&name, &table, format!("datasets/{name}/raw.csv"));
            profile.profile_text = text;
            cat.datasets.insert(name, DatasetEntry { profile, table: Arc::new(table) });
        }

        for dir in sorted_subdirs(&root.join("models"))? {
            let name = file_name(&dir);
            let Ok(card_json) = fs::read(dir.join("card.json")) else {
                tracing::warn!(model = %name, "skipping incomplete model directory");
                continue;
            };
            let mut card: ModelCard = serde_json::from_slice(&card_json)?;
            card.profile_text = fs::read_to_string(dir.join("profile.txt"))?;
            let model = load_weights(&root.join(&card.weights_path))?;
            cat.models.insert(name, ModelEntry { card, model: Arc::new(model) });
        }

        let empty = cat.datasets.is_empty() && cat.models.is_empty();
        match cat.load_saved_index() {
            _ if empty => cat.rebuild_index()?,
            Ok(index) if cat.index_matches(&index) => cat.index = index,
            Ok(_) => {
                tracing::info!("saved index is stale, re-embedding profiles");
                cat.rebuild_index()?;
            }
            Err(e) => {
                tracing::info!(error = %e, "no usable saved index, re-embedding profiles");
                cat.rebuild_index()?;
            }
        }
        Ok(cat)
    }

    fn load_saved_index(&self) -> Result<VectorIndex, IndexError> {
        let root = self.root.as_ref().expect("disk catalog");
        let mut index = VectorIndex::load(&root.join("index/datasets.idx"))?;
        index.merge_from(VectorIndex::load(&root.join("index/models.idx"))?)?;
        Ok(index)
    }

    fn index_matches(&self, index: &VectorIndex) -> bool {
        if index.dimension() != self.encoder.dimension() || index.len() != self.datasets.len() + self.models.len() {
            return false;
        }
        let same = |kind, name: &str, text: &str| index.get(name, kind).is_some_and(|r| r.profile_text == text);
        self.datasets.iter().all(|(n, e)| same(EntityKind::Dataset, n, &e.profile.profile_text))
            && self.models.iter().all(|(n, e)| same(EntityKind::Model, n, &e.card.profile_text))
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    pub fn encoder(&self) -> &Arc<dyn Encoder> {
        &self.encoder
    }

    pub fn index(&self) -> &VectorIndex {
        &self.index
    }

    pub fn embed(&self, text: &str) -> Result<Embedding, EmbeddingError> {
        self.encoder.embed(text)
    }

    pub fn search(&self, query: &Embedding, kind: EntityKind, k: usize) -> Vec<RetrievalHit> {
        self.index.top_k(query, kind, k)
    }

    /// Re-embeds every profile into a fresh index and saves it.
    pub fn rebuild_index(&mut self) -> Result<(), CatalogError> {
        let mut index = VectorIndex::new(self.encoder.dimension());
        for (name, e) in &self.datasets {
            index.upsert(self.record(name, EntityKind::Dataset, &e.profile.profile_text)?)?;
        }
        for (name, e) in &self.models {
            index.upsert(self.record(name, EntityKind::Model, &e.card.profile_text)?)?;
        }
        self.index = index;
        self.save_index(None)
    }

    fn record(&self, id: &str, kind: EntityKind, text: &str) -> Result<EntityRecord, CatalogError> {
        Ok(EntityRecord {
            id: id.to_string(),
            kind,
            embedding: self.encoder.embed(text)?,
            profile_text: text.to_string(),
        })
    }

    fn save_index(&self, kind: Option<EntityKind>) -> Result<(), CatalogError> {
        let Some(root) = &self.root else { return Ok(()) };
        if kind.is_none_or(|k| k == EntityKind::Dataset) {
            self.index.save_filtered(&root.join("index/datasets.idx"), Some(EntityKind::Dataset))?;
        }
        if kind.is_none_or(|k| k == EntityKind::Model) {
            self.index.save_filtered(&root.join("index/models.idx"), Some(EntityKind::Model))?;
        }
        Ok(())
    }

    /// Parses `csv`, profiles it and registers it under `name`.
    pub fn ingest_dataset(&mut self, name: &str, csv: &[u8]) -> Result<DatasetProfile, CatalogError> {
        validate_name(name)?;
        if self.datasets.contains_key(name) {
            return Err(CatalogError::DuplicateName(name.to_string()));
        }
        let table = Table::from_csv(csv)?;
        let profile = dataset_profile(name, &table, format!("datasets/{name}/raw.csv"));
        let record = self.record(name, EntityKind::Dataset, &profile.profile_text)?;
        if let Some(root) = &self.root {
            let dir = root.join("datasets").join(name);
            write_atomic(&dir.join("raw.csv"), csv)?;
            write_atomic(&dir.join("profile.txt"), profile.profile_text.as_bytes())?;
        }
        self.index.upsert(record)?;
        self.datasets.insert(name.to_string(), DatasetEntry { profile: profile.clone(), table: Arc::new(table) });
        self.save_index(Some(EntityKind::Dataset))?;
        Ok(profile)
    }

    pub fn dataset(&self, name: &str) -> Option<&DatasetProfile> {
        self.datasets.get(name).map(|e| &e.profile)
    }

    pub fn table(&self, name: &str) -> Option<Arc<Table>> {
        self.datasets.get(name).map(|e| Arc::clone(&e.table))
    }

    /// Datasets ascending by name.
    pub fn datasets(&self) -> impl Iterator<Item = &DatasetProfile> {
        self.datasets.values().map(|e| &e.profile)
    }

    /// Renders the profile, stores weights and card, and indexes the model.
    /// `weights_path` and `profile_text` of `card` are filled in here.
    pub fn register_model(&mut self, mut card: ModelCard, model: TrainedModel) -> Result<ModelCard, CatalogError> {
        validate_name(&card.name)?;
        if self.models.contains_key(&card.name) {
            return Err(CatalogError::DuplicateName(card.name));
        }
        if !self.datasets.contains_key(&card.dataset_name) {
            return Err(CatalogError::UnknownDataset(card.dataset_name));
        }
        card.validate()?;
        card.weights_path = format!("models/{}/weights.bin", card.name);
        card.profile_text = render_model_profile(&card);
        let record = self.record(&card.name, EntityKind::Model, &card.profile_text)?;
        if let Some(root) = &self.root {
            let dir = root.join("models").join(&card.name);
            save_weights(&model, &root.join(&card.weights_path))?;
            write_atomic(&dir.join("profile.txt"), card.profile_text.as_bytes())?;
            write_atomic(&dir.join("card.json"), &serde_json::to_vec_pretty(&card)?)?;
        }
        self.index.upsert(record)?;
        self.models.insert(card.name.clone(), ModelEntry { card: card.clone(), model: Arc::new(model) });
        self.save_index(Some(EntityKind::Model))?;
        Ok(card)
    }

    pub fn model(&self, name: &str) -> Option<&ModelCard> {
        self.models.get(name).map(|e| &e.card)
    }

    pub fn trained_model(&self, name: &str) -> Option<Arc<TrainedModel>> {
        self.models.get(name).map(|e| Arc::clone(&e.model))
    }

    /// Models ascending by name.
    pub fn models(&self) -> impl Iterator<Item = &ModelCard> {
        self.models.values().map(|e| &e.card)
    }

    pub fn model_names(&self) -> BTreeSet<String> {
        self.models.keys().cloned().collect()
    }
}

fn sorted_subdirs(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_ok_and(|t| t.is_dir()))
        .map(|e| e.path())
        .collect();
    out.sort();
    Ok(out)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}
