//! The conversation engine: retrieves a model and dataset for a prediction
//! query, asks the user to confirm, and either runs the matched model or
//! trains a new one on the matched dataset.
//!
//! Each session is a small state machine over [`Phase`]. Messages to one
//! session are handled one at a time; different sessions run concurrently
//! and share the catalog behind a reader-writer lock.

mod session;

use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::Utc;
use parking_lot::{Mutex, RwLock, RwLockReadGuard};
use serde_json::{json, Value};
use thiserror::Error;

use crate::catalog::profile::{format_metric, metric_label};
use crate::catalog::{
    default_limitations, generate_model_name, round_metric, Catalog, CatalogError, DatasetProfile, ModelCard, Target,
};
use crate::config::{ConfigError, EngineConfig, ProviderMode};
use crate::embedding::{cosine, EmbeddingError, HashNgramEncoder};
use crate::lm_provider::text::{is_task_verb, words};
use crate::lm_provider::{Intent, LanguageProvider, ProviderError, RemoteProvider, RuleBasedProvider};
use crate::ml_engine::{
    encode, encoded_columns, identifier_columns, predict, recommend, train_linear_regression,
    train_logistic_classifier, train_recommender, Algorithm, EncodedKind, Interaction, MlError, Task,
};
use crate::preprocess::{apply_filter, parse_filter, Predicate, PreprocessError};
use crate::table::{parse_number, Table};
use crate::vector_index::EntityKind;

pub use session::{Phase, Reply, ReplyKind, Role, Session, SessionLog, SessionState, Turn};

/// Largest accepted chat message, in bytes.
pub const MAX_MESSAGE_BYTES: usize = 8 * 1024;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("message is {size} bytes; the limit is {limit} bytes")]
    MessageTooLarge { size: usize, limit: usize },
    #[error("message is empty")]
    EmptyMessage,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("session log error: {0}")]
    Io(#[from] std::io::Error),
}

/// Why a training request failed.
#[derive(Debug, Error)]
pub enum TrainError {
    #[error("unknown dataset {0:?}")]
    UnknownDataset(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub name: String,
    pub score: f64,
}

/// Top model and dataset above their thresholds. When both are present the
/// dataset is the one the model was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidates {
    pub model: Option<Hit>,
    pub dataset: Option<Hit>,
    pub aligned: bool,
    /// The retrieved dataset differed from the model's and was replaced.
    pub repaired: bool,
}

pub struct Engine {
    config: EngineConfig,
    catalog: RwLock<Catalog>,
    provider: Box<dyn LanguageProvider>,
    sessions: Mutex<BTreeMap<String, Arc<Mutex<Session>>>>,
    log: Option<SessionLog>,
}

impl Engine {
    /// Opens the catalog and sessions under `config.data_dir` (or in memory)
    /// with the provider named by the configuration.
    pub fn open(config: EngineConfig) -> Result<Self, EngineError> {
        let provider: Box<dyn LanguageProvider> = match config.provider.mode {
            ProviderMode::RuleBased => Box::new(RuleBasedProvider),
            ProviderMode::Remote => Box::new(RemoteProvider::new(config.provider.remote.clone())?),
        };
        Self::with_provider(config, provider)
    }

    pub fn with_provider(config: EngineConfig, provider: Box<dyn LanguageProvider>) -> Result<Self, EngineError> {
        config.validate()?;
        let encoder = Arc::new(HashNgramEncoder::new(config.embedding)?);
        let (catalog, log) = match &config.data_dir {
            Some(dir) => (Catalog::open(dir, encoder)?, Some(SessionLog::new(&dir.join("sessions"))?)),
            None => (Catalog::in_memory(encoder), None),
        };
        let mut sessions = BTreeMap::new();
        if let Some(log) = &log {
            for s in log.load_all()? {
                sessions.insert(s.id.clone(), Arc::new(Mutex::new(s)));
            }
        }
        Ok(Self { config, catalog: RwLock::new(catalog), provider, sessions: Mutex::new(sessions), log })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn provider(&self) -> &dyn LanguageProvider {
        self.provider.as_ref()
    }

    /// Shared read access to the catalog.
    pub fn catalog(&self) -> RwLockReadGuard<'_, Catalog> {
        self.catalog.read()
    }

    pub fn ingest_dataset(&self, name: &str, csv: &[u8]) -> Result<DatasetProfile, CatalogError> {
        self.catalog.write().ingest_dataset(name, csv)
    }

    pub fn rebuild_index(&self) -> Result<(), CatalogError> {
        self.catalog.write().rebuild_index()
    }

    pub fn create_session(&self) -> Result<Session, EngineError> {
        let session = Session::new(uuid::Uuid::new_v4().to_string());
        if let Some(log) = &self.log {
            log.create(&session)?;
        }
        self.sessions.lock().insert(session.id.clone(), Arc::new(Mutex::new(session.clone())));
        Ok(session)
    }

    /// A snapshot of the session.
    pub fn session(&self, id: &str) -> Option<Session> {
        let s = self.sessions.lock().get(id).cloned()?;
        let snapshot = s.lock().clone();
        Some(snapshot)
    }

    pub fn session_ids(&self) -> Vec<String> {
        self.sessions.lock().keys().cloned().collect()
    }

    /// Runs one user message through the session's state machine. Failures
    /// inside the workflow come back as `error` or `clarification` replies;
    /// only an unknown session or an unusable message is an `Err`.
    pub fn handle_message(&self, session_id: &str, text: &str) -> Result<Reply, EngineError> {
        if text.len() > MAX_MESSAGE_BYTES {
            return Err(EngineError::MessageTooLarge { size: text.len(), limit: MAX_MESSAGE_BYTES });
        }
        if text.trim().is_empty() {
            return Err(EngineError::EmptyMessage);
        }
        let session = self
            .sessions
            .lock()
            .get(session_id)
            .cloned()
            .ok_or_else(|| EngineError::UnknownSession(session_id.to_string()))?;
        let mut s = session.lock();
        let reply = self.step(&mut s.state, text);
        s.transcript.push(Turn { role: Role::User, text: text.to_string(), kind: None });
        s.transcript.push(Turn { role: Role::Assistant, text: reply.text.clone(), kind: Some(reply.kind) });
        if let Some(log) = &self.log {
            log.record(&s, text, &reply)?;
        }
        Ok(reply)
    }

    fn step(&self, state: &mut SessionState, text: &str) -> Reply {
        let intent = self.provider.classify_intent(text);
        match (state.phase, intent) {
            (_, Intent::Guide) => Reply::text_only(ReplyKind::Guide, GUIDE),
            (_, Intent::Query) => self.start_query(state, text),
            (Phase::AwaitAlgorithm, Intent::Chat) => unknown_algorithm(text),
            (_, Intent::Chat) => Reply::text_only(ReplyKind::Clarification, CAPABILITIES),
            (Phase::AwaitQuery | Phase::Done, _) => Reply::text_only(
                ReplyKind::Clarification,
                "There is no pending request. Ask a prediction question first, for example \
                 \"predict house price for a house aged 10 years\".",
            ),
            (Phase::CandidateShown, Intent::Confirm) if state.matched_model.is_some() => self.confirmed(state),
            (Phase::CandidateShown, Intent::Confirm | Intent::Change) => self.algorithm_menu(state),
            (Phase::AwaitAlgorithm, Intent::Change) => self.algorithm_menu(state),
            (Phase::AwaitAlgorithm, Intent::Confirm) => {
                let algorithm = state.task.unwrap_or(Task::Regression).default_algorithm();
                self.train_and_answer(state, algorithm)
            }
            (Phase::CandidateShown | Phase::AwaitAlgorithm, Intent::Selection) => {
                match self.provider.find_algorithm(text) {
                    Some(a) => self.train_and_answer(state, a),
                    None => unknown_algorithm(text),
                }
            }
        }
    }

    /// Embeds `query` once and takes the best model and dataset above their
    /// thresholds. A model's own training dataset replaces a different
    /// retrieved dataset.
    pub fn retrieve_candidates(&self, query: &str) -> Result<Candidates, EmbeddingError> {
        let cat = self.catalog.read();
        let q = cat.embed(query)?;
        let t = self.config.thresholds;
        let top = |kind| cat.search(&q, kind, 1).into_iter().next().map(|h| Hit { name: h.id, score: h.score });
        let mut model = top(EntityKind::Model).filter(|h| h.score >= t.tau_model);
        let mut dataset = top(EntityKind::Dataset).filter(|h| h.score >= t.tau_dataset);
        let mut repaired = false;
        if let Some(card) = model.as_ref().and_then(|m| cat.model(&m.name)) {
            let own = &card.dataset_name;
            if dataset.as_ref().is_none_or(|d| &d.name != own) {
                match cat.index().get(own, EntityKind::Dataset) {
                    Some(rec) => {
                        dataset = Some(Hit { name: own.clone(), score: cosine(&q, &rec.embedding)? });
                        repaired = true;
                    }
                    None => model = None,
                }
            }
        }
        let aligned = match (&model, &dataset) {
            (Some(m), Some(d)) => cat.model(&m.name).is_some_and(|c| c.dataset_name == d.name),
            _ => false,
        };
        Ok(Candidates { model, dataset, aligned, repaired })
    }

    fn start_query(&self, state: &mut SessionState, query: &str) -> Reply {
        state.reset(Phase::AwaitQuery);
        let cands = match self.retrieve_candidates(query) {
            Ok(c) => c,
            Err(e) => return Reply::text_only(ReplyKind::Error, format!("Could not read the query: {e}.")),
        };
        let Some(dataset_hit) = cands.dataset.clone() else {
            return Reply::new(
                ReplyKind::Clarification,
                "I could not find a model or dataset related to this query. Try naming the quantity to \
                 predict, or upload a dataset that contains it.",
                json!({ "model": null, "dataset": null }),
            );
        };
        let cat = self.catalog.read();
        let Some(dataset) = cat.dataset(&dataset_hit.name) else {
            return Reply::text_only(
                ReplyKind::Error,
                format!("Dataset {:?} is no longer available.", dataset_hit.name),
            );
        };
        let predicate = if self.provider.needs_preprocessing(query) {
            match parse_filter(query, &dataset.columns) {
                Ok(p) if !p.is_empty() => Some(p),
                Ok(_) => None,
                Err(e) => {
                    return Reply::new(
                        ReplyKind::Clarification,
                        format!(
                            "{e}. Restrictions can name a category (\"only consider female data\") or compare a \
                             column with a number (\"house age less than 30\")."
                        ),
                        json!({ "dataset": dataset_summary(dataset) }),
                    );
                }
            }
        } else {
            None
        };
        let task = infer_task(self.provider.as_ref(), query, &cat, &dataset.name);
        let filter_text = predicate.as_ref().map(Predicate::describe);

        state.pending_query = Some(query.to_string());
        state.matched_dataset = Some(dataset.name.clone());
        state.dataset_score = Some(dataset_hit.score);
        state.predicate = predicate;
        state.task = Some(task);
        state.phase = Phase::CandidateShown;

        let usable = cands.model.as_ref().and_then(|m| cat.model(&m.name).map(|c| (m, c))).filter(|(_, c)| {
            cands.aligned
                && c.filter == filter_text
                && (c.task == Task::Recommendation) == (task == Task::Recommendation)
        });
        if let Some((hit, card)) = usable {
            state.matched_model = Some(card.name.clone());
            state.model_score = Some(hit.score);
            return Reply::new(
                ReplyKind::CandidateCard,
                format!(
                    "I found the model '{}' trained on the dataset '{}' for this query (match score {:.2}). \
                     Reply \"yes\" to use it, or \"new\" to train a different model.",
                    card.name, dataset.name, hit.score
                ),
                json!({
                    "model": card_summary(card),
                    "dataset": dataset_summary(dataset),
                    "model_score": hit.score,
                    "dataset_score": dataset_hit.score,
                    "aligned": true,
                    "repaired": cands.repaired,
                }),
            );
        }

        let default = task.default_algorithm();
        let mut text = format!(
            "No trained model fits this query, but the dataset '{}' matches it (match score {:.2}). \
             Reply \"yes\" to train a model on it, or name an algorithm. The default for this request is {}.",
            dataset.name,
            dataset_hit.score,
            default.token()
        );
        if let Some(f) = &filter_text {
            text.push_str(&format!(" Training will only use rows where {f}."));
        }
        Reply::new(
            ReplyKind::TrainOffer,
            text,
            json!({
                "dataset": dataset_summary(dataset),
                "dataset_score": dataset_hit.score,
                "default_algorithm": default.token(),
                "algorithms": Algorithm::ALL.iter().map(|a| a.token()).collect::<Vec<_>>(),
                "filter": filter_text,
                "nearest_model": cands.model.as_ref().map(|m| json!({ "name": m.name, "score": m.score })),
            }),
        )
    }

    fn algorithm_menu(&self, state: &mut SessionState) -> Reply {
        let Some(dataset) = state.matched_dataset.clone() else {
            state.reset(Phase::AwaitQuery);
            return Reply::text_only(ReplyKind::Clarification, "Ask a prediction question first.");
        };
        let default = state.task.unwrap_or(Task::Regression).default_algorithm();
        state.phase = Phase::AwaitAlgorithm;
        let options: Vec<Value> = Algorithm::ALL
            .iter()
            .map(|a| {
                json!({
                    "name": a.token(),
                    "display_name": a.display_name(),
                    "task": a.task().as_str(),
                    "default": *a == default,
                })
            })
            .collect();
        let listed: Vec<String> = Algorithm::ALL
            .iter()
            .map(|a| if *a == default { format!("{} (default)", a.token()) } else { a.token().to_string() })
            .collect();
        Reply::new(
            ReplyKind::AlgorithmMenu,
            format!(
                "Which algorithm should I train on '{dataset}'? Options: {}. Reply \"yes\" for the default.",
                listed.join(", ")
            ),
            json!({ "dataset": dataset, "default": default.token(), "algorithms": options }),
        )
    }

    fn confirmed(&self, state: &mut SessionState) -> Reply {
        let (Some(model), Some(dataset), Some(query)) =
            (state.matched_model.clone(), state.matched_dataset.clone(), state.pending_query.clone())
        else {
            state.reset(Phase::AwaitQuery);
            return Reply::text_only(ReplyKind::Clarification, "Ask a prediction question first.");
        };
        state.phase = Phase::Done;
        self.run_inference(&model, &dataset, &query)
    }

    fn train_and_answer(&self, state: &mut SessionState, algorithm: Algorithm) -> Reply {
        let (Some(dataset), Some(query)) = (state.matched_dataset.clone(), state.pending_query.clone()) else {
            state.reset(Phase::AwaitQuery);
            return Reply::text_only(ReplyKind::Clarification, "Ask a prediction question first.");
        };
        let card = match self.train_model(&dataset, &query, algorithm, state.predicate.as_ref()) {
            Ok(card) => card,
            Err(e) => {
                state.phase = Phase::AwaitAlgorithm;
                return Reply::new(
                    ReplyKind::Error,
                    format!(
                        "Training {} on '{dataset}' failed: {e}. Pick another algorithm or rephrase the query.",
                        algorithm.token()
                    ),
                    json!({ "algorithm": algorithm.token(), "dataset": dataset }),
                );
            }
        };
        state.matched_model = Some(card.name.clone());
        state.model_score = None;
        state.phase = Phase::Done;
        let mut reply = self.run_inference(&card.name, &dataset, &query);
        reply.text = format!(
            "Trained the model '{}' ({}) on {} rows of '{}'. {}",
            card.name,
            card.algorithm.token(),
            card.training_rows,
            dataset,
            reply.text
        );
        if let Value::Object(m) = &mut reply.payload {
            m.insert("trained".into(), Value::Bool(true));
        }
        reply
    }

    /// Trains `algorithm` for `query` on the rows of `dataset` kept by
    /// `predicate`, then names, profiles and registers the model.
    pub fn train_model(
        &self,
        dataset: &str,
        query: &str,
        algorithm: Algorithm,
        predicate: Option<&Predicate>,
    ) -> Result<ModelCard, TrainError> {
        let (full, schema) = {
            let cat = self.catalog.read();
            let table = cat.table(dataset).ok_or_else(|| TrainError::UnknownDataset(dataset.into()))?;
            let schema = cat.dataset(dataset).map(|d| d.columns.clone()).unwrap_or_default();
            (table, schema)
        };
        let filtered;
        let table: &Table = match predicate.filter(|p| !p.is_empty()) {
            Some(p) => {
                p.validate(&schema)?;
                filtered = apply_filter(&full, p)?;
                &filtered
            }
            None => &full,
        };
        let task = algorithm.task();
        let config = self.config.training.get(algorithm).clone();

        let (model, metrics, feature_order, target, rows, name_hint) = match task {
            Task::Regression | Task::BinaryClassification => {
                let ids = identifier_columns(&full, &schema);
                let layout: Vec<_> =
                    encoded_columns(table, &schema).into_iter().filter(|c| !ids.contains(&c.source)).collect();
                let names: Vec<String> = layout.iter().map(|c| c.name.clone()).collect();
                let sel = self.provider.select_columns(query, &names, task)?;
                let Target::Column(mut target) = sel.target else {
                    return Err(ProviderError::NoTargetMatch("a single target column".into()).into());
                };
                if task == Task::BinaryClassification {
                    target = positive_member(&layout, &target);
                }
                let enc = encode(table, &schema, &sel.features, Some(&target))?;
                let (model, metrics) = match algorithm {
                    Algorithm::LinearRegression => train_linear_regression(&enc.matrix, &config)?,
                    _ => train_logistic_classifier(&enc.matrix, &config)?,
                };
                let rows = enc.matrix.n_rows();
                (model, metrics, enc.matrix.feature_names, Target::Column(target.clone()), rows, target)
            }
            Task::Recommendation => {
                let sel = self.provider.select_columns(query, &table.headers, task)?;
                let Target::Interaction { user_col, item_col } = sel.target else {
                    return Err(ProviderError::NoTargetMatch("user and item columns".into()).into());
                };
                let (u, i) = (
                    table.column_index(&user_col).ok_or_else(|| MlError::UnknownColumn(user_col.clone()))?,
                    table.column_index(&item_col).ok_or_else(|| MlError::UnknownColumn(item_col.clone()))?,
                );
                let pairs: Vec<Interaction> = table
                    .rows
                    .iter()
                    .filter(|r| !r[u].is_empty() && !r[i].is_empty())
                    .map(|r| Interaction::new(r[u].clone(), r[i].clone()))
                    .collect();
                let (model, metrics) = train_recommender(&pairs, &config)?;
                let order = vec![user_col.clone(), item_col.clone()];
                (
                    model,
                    metrics,
                    order,
                    Target::Interaction { user_col, item_col: item_col.clone() },
                    pairs.len(),
                    item_col,
                )
            }
        };

        let mut cat = self.catalog.write();
        let name = generate_model_name(algorithm, &name_hint, &cat.model_names());
        let card = ModelCard {
            name,
            dataset_name: dataset.to_string(),
            task,
            algorithm,
            feature_order,
            target,
            metrics: metrics.into_iter().map(|(k, v)| (k, round_metric(v))).collect(),
            limitations: default_limitations(task).to_string(),
            weights_path: String::new(),
            created_at: Utc::now(),
            profile_text: String::new(),
            query: query.to_string(),
            training_rows: rows,
            filter: predicate.filter(|p| !p.is_empty()).map(Predicate::describe),
        };
        Ok(cat.register_model(card, model)?)
    }

    /// Answers `query` with a registered model. The model must belong to
    /// `dataset`.
    pub fn run_inference(&self, model_name: &str, dataset_name: &str, query: &str) -> Reply {
        let cat = self.catalog.read();
        let (Some(card), Some(model), Some(dataset)) =
            (cat.model(model_name), cat.trained_model(model_name), cat.dataset(dataset_name))
        else {
            return Reply::text_only(ReplyKind::Error, format!("Model {model_name:?} is no longer available."));
        };
        if card.dataset_name != dataset.name {
            return Reply::text_only(
                ReplyKind::Error,
                format!("Model '{}' was trained on '{}', not on '{}'.", card.name, card.dataset_name, dataset.name),
            );
        }
        let body = if self.provider.needs_preprocessing(query) { after_restriction(query) } else { query };
        let metrics_text = card
            .metrics
            .iter()
            .map(|(k, v)| format!("{} {}", metric_label(k), format_metric(*v)))
            .collect::<Vec<_>>()
            .join(", ");

        if let Target::Interaction { user_col, item_col } = &card.target {
            let user = match self.provider.extract_user_id(body) {
                Ok(u) => u,
                Err(e) => {
                    return Reply::text_only(
                        ReplyKind::Clarification,
                        format!("{e}. Mention the user like \"user id 4407\"."),
                    );
                }
            };
            let recs = match recommend(&model, &user, self.config.recommend_k) {
                Ok(r) => r,
                Err(MlError::UnknownUser(u)) => {
                    return Reply::new(
                        ReplyKind::Clarification,
                        format!("The {user_col} {u:?} does not appear in '{}'. Try another id.", dataset.name),
                        json!({ "user_id": u }),
                    );
                }
                Err(e) => return Reply::text_only(ReplyKind::Error, format!("Recommendation failed: {e}.")),
            };
            let listed: Vec<String> =
                recs.iter().enumerate().map(|(i, (item, _))| format!("{}. {item}", i + 1)).collect();
            return Reply::new(
                ReplyKind::Answer,
                format!(
                    "Top {} {item_col} for {user_col} {user}: {}. Model '{}' ({metrics_text}).",
                    recs.len(),
                    listed.join(", "),
                    card.name
                ),
                json!({
                    "model": card_summary(card),
                    "dataset": dataset.name,
                    "user_id": user,
                    "recommendations": recs.iter().map(|(item, score)| json!({ "item": item, "score": score })).collect::<Vec<_>>(),
                    "metrics": card.metrics,
                }),
            );
        }

        let values = match self.provider.extract_feature_values(body, &card.feature_order, &dataset.columns) {
            Ok(v) => v,
            Err(ProviderError::MissingFeature(missing)) => {
                return Reply::new(
                    ReplyKind::Clarification,
                    format!(
                        "The model '{}' needs values for {}. Please ask again including them.",
                        card.name,
                        missing.join(", ")
                    ),
                    json!({ "missing": missing, "model": card_summary(card) }),
                );
            }
            Err(e) => return Reply::text_only(ReplyKind::Clarification, format!("{e}.")),
        };
        let y = match predict(&model, &values) {
            Ok(y) => y,
            Err(e) => return Reply::text_only(ReplyKind::Error, format!("Prediction failed: {e}.")),
        };
        let target = match &card.target {
            Target::Column(t) => t.clone(),
            Target::Interaction { item_col, .. } => item_col.clone(),
        };
        let features: Vec<Value> =
            card.feature_order.iter().zip(&values).map(|(n, v)| json!({ "name": n, "value": v })).collect();
        let (text, prediction, probability) = match card.task {
            Task::BinaryClassification => {
                let class = if y >= 0.5 { 1.0 } else { 0.0 };
                (format!("The predicted {target} is {class} (probability {y:.3})."), class, Some(y))
            }
            _ => (format!("The predicted {target} is {}.", display_value(y)), y, None),
        };
        Reply::new(
            ReplyKind::Answer,
            format!("{text} Model '{}' ({metrics_text}).", card.name),
            json!({
                "model": card_summary(card),
                "dataset": dataset.name,
                "prediction": prediction,
                "probability": probability,
                "features": features,
                "metrics": card.metrics,
            }),
        )
    }
}

const GUIDE: &str = "Ask a prediction question in plain language, for example \"predict insurance charge for a \
    30 year old male non-smoker living in southeast with a BMI of 25 and 2 children\". I search the catalog for a \
    trained model and a dataset that fit the question and show you what I found.\n\
    - Reply \"yes\" to run the suggested model.\n\
    - Reply \"new\" to train another model on the dataset, then pick linear_regression, logistic_classifier or recommender.\n\
    - Begin with a restriction such as \"only consider female data,\" to train on a subset of the rows.\n\
    - New datasets can be uploaded as CSV files.";

const CAPABILITIES: &str = "I answer prediction questions using the registered datasets and models. Ask something \
    like \"predict ...\" or \"recommend ... for user id ...\", or type \"help\" for a guide.";

fn unknown_algorithm(text: &str) -> Reply {
    let valid: Vec<&str> = Algorithm::ALL.iter().map(|a| a.token()).collect();
    Reply::new(
        ReplyKind::Error,
        format!("{:?} is not an algorithm I can train. Valid algorithms: {}.", text.trim(), valid.join(", ")),
        json!({ "algorithms": valid }),
    )
}

fn display_value(v: f64) -> String {
    if v.abs() >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.4}")
    }
}

/// The card fields shown to clients (everything except paths and timestamps).
pub fn card_summary(card: &ModelCard) -> Value {
    json!({
        "name": card.name,
        "dataset_name": card.dataset_name,
        "task": card.task,
        "algorithm": card.algorithm,
        "feature_order": card.feature_order,
        "target": card.target,
        "metrics": card.metrics,
        "training_rows": card.training_rows,
        "filter": card.filter,
    })
}

pub fn dataset_summary(d: &DatasetProfile) -> Value {
    json!({ "name": d.name, "row_count": d.row_count, "columns": d.columns })
}

/// The query from its first task verb on, dropping a leading restriction
/// clause whose numbers would otherwise be read as feature values.
fn after_restriction(query: &str) -> &str {
    let mut start = None;
    for (i, c) in query.char_indices() {
        let boundary = c.is_alphanumeric() && query[..i].chars().next_back().is_none_or(|p| !p.is_alphanumeric());
        if boundary {
            let word: String = query[i..].chars().take_while(|c| c.is_alphanumeric()).collect();
            if is_task_verb(&word.to_lowercase()) {
                start = Some(i);
                break;
            }
        }
    }
    start.map_or(query, |i| &query[i..])
}

/// Recommendation for "recommend", classification for "classify" or a 0/1
/// or indicator target, regression otherwise.
fn infer_task(provider: &dyn LanguageProvider, query: &str, cat: &Catalog, dataset: &str) -> Task {
    let ws = words(query);
    if ws.iter().any(|w| w.starts_with("recommend")) {
        return Task::Recommendation;
    }
    if ws.iter().any(|w| w.starts_with("classif") && is_task_verb(w)) {
        return Task::BinaryClassification;
    }
    let (Some(table), Some(profile)) = (cat.table(dataset), cat.dataset(dataset)) else { return Task::Regression };
    let ids = identifier_columns(&table, &profile.columns);
    let layout: Vec<_> =
        encoded_columns(&table, &profile.columns).into_iter().filter(|c| !ids.contains(&c.source)).collect();
    let names: Vec<String> = layout.iter().map(|c| c.name.clone()).collect();
    let Ok(sel) = provider.select_columns(query, &names, Task::Regression) else { return Task::Regression };
    let Target::Column(target) = sel.target else { return Task::Regression };
    let Some(col) = layout.iter().find(|c| c.name == target) else { return Task::Regression };
    let binary = match col.kind {
        EncodedKind::OneHot(_) => true,
        EncodedKind::Numeric => table.column_index(&col.source).is_some_and(|ci| {
            table
                .rows
                .iter()
                .all(|r| r[ci].is_empty() || matches!(parse_number(&r[ci]), Some(v) if v == 0.0 || v == 1.0))
        }),
    };
    if binary {
        Task::BinaryClassification
    } else {
        Task::Regression
    }
}

/// For a yes/no indicator group, the "yes" member; otherwise `target`.
fn positive_member(layout: &[crate::ml_engine::EncodedColumn], target: &str) -> String {
    const NO: [&str; 5] = ["no", "n", "false", "f", "0"];
    const YES: [&str; 5] = ["yes", "y", "true", "t", "1"];
    let Some(col) = layout.iter().find(|c| c.name == target) else { return target.to_string() };
    let EncodedKind::OneHot(v) = &col.kind else { return target.to_string() };
    if !NO.contains(&v.to_lowercase().as_str()) {
        return target.to_string();
    }
    layout
        .iter()
        .find(|c| {
            c.source == col.source
                && matches!(&c.kind, EncodedKind::OneHot(o) if YES.contains(&o.to_lowercase().as_str()))
        })
        .map_or_else(|| target.to_string(), |c| c.name.clone())
}
