//! JSON-over-HTTP front end for [`Engine`].
//!
//! Every response body is JSON. Failures use
//! `{"error": {"code": ..., "message": ...}}`.

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pqa_core::catalog::CatalogError;
use pqa_core::orchestrator::{card_summary, dataset_summary, Engine, EngineError};
use serde::Deserialize;
use serde_json::{json, Value};

/// Largest accepted upload, in bytes.
pub const MAX_UPLOAD_BYTES: usize = 256 * 1024 * 1024;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into() }
    }

    fn not_found(what: &str, name: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("unknown {what} {name:?}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let message = e.to_string();
        match e {
            EngineError::UnknownSession(_) => Self::new(StatusCode::NOT_FOUND, "unknown_session", message),
            EngineError::MessageTooLarge { .. } => {
                Self::new(StatusCode::PAYLOAD_TOO_LARGE, "message_too_large", message)
            }
            EngineError::EmptyMessage => Self::new(StatusCode::BAD_REQUEST, "empty_message", message),
            EngineError::Catalog(c) => c.into(),
            _ => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message),
        }
    }
}

impl From<CatalogError> for ApiError {
    fn from(e: CatalogError) -> Self {
        let message = e.to_string();
        let (status, code) = match e {
            CatalogError::DuplicateName(_) => (StatusCode::CONFLICT, "duplicate_name"),
            CatalogError::InvalidName(_) => (StatusCode::BAD_REQUEST, "invalid_name"),
            CatalogError::Table(_) => (StatusCode::BAD_REQUEST, "invalid_csv"),
            CatalogError::UnknownDataset(_) | CatalogError::UnknownModel(_) => (StatusCode::NOT_FOUND, "not_found"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        Self::new(status, code, message)
    }
}

impl From<BytesRejection> for ApiError {
    fn from(e: BytesRejection) -> Self {
        let status = e.status();
        let code = if status == StatusCode::PAYLOAD_TOO_LARGE { "body_too_large" } else { "invalid_body" };
        Self::new(status, code, e.body_text())
    }
}

type ApiResult = Result<(StatusCode, Json<Value>), ApiError>;

/// Runs catalog and model work off the async executor.
async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}", get(get_session))
        .route("/v1/sessions/{id}/messages", post(post_message))
        .route("/v1/datasets", post(upload_dataset).get(list_datasets))
        .route("/v1/datasets/{name}/profile", get(dataset_profile))
        .route("/v1/models", get(list_models))
        .route("/v1/models/{name}/profile", get(model_profile))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(engine)
}

async fn create_session(State(engine): State<Arc<Engine>>) -> ApiResult {
    let s = blocking(move || Ok(engine.create_session()?)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "id": s.id, "phase": s.state.phase }))))
}

async fn get_session(State(engine): State<Arc<Engine>>, Path(id): Path<String>) -> ApiResult {
    let s = engine.session(&id).ok_or_else(|| ApiError::from(EngineError::UnknownSession(id)))?;
    Ok((StatusCode::OK, Json(serde_json::to_value(s).expect("session serializes"))))
}

#[derive(Deserialize)]
struct MessageBody {
    text: String,
}

async fn post_message(
    State(engine): State<Arc<Engine>>,
    Path(id): Path<String>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult {
    let body = body?;
    let msg: MessageBody = serde_json::from_slice(&body).map_err(|e| {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_body", format!("expected {{\"text\": ...}}: {e}"))
    })?;
    let reply = blocking(move || Ok(engine.handle_message(&id, &msg.text)?)).await?;
    Ok((StatusCode::OK, Json(serde_json::to_value(reply).expect("reply serializes"))))
}

async fn upload_dataset(
    State(engine): State<Arc<Engine>>,
    Query(params): Query<HashMap<String, String>>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult {
    let body = body?;
    let name = params
        .get("name")
        .cloned()
        .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "missing_name", "add ?name=<dataset name> to the URL"))?;
    let profile = blocking(move || Ok(engine.ingest_dataset(&name, &body)?)).await?;
    Ok((StatusCode::CREATED, Json(dataset_summary(&profile))))
}

async fn list_datasets(State(engine): State<Arc<Engine>>) -> ApiResult {
    blocking(move || {
        let cat = engine.catalog();
        let mut items: Vec<_> = cat.datasets().collect();
        items.sort_by(|a, b| a.name.cmp(&b.name));
        let items: Vec<Value> = items.into_iter().map(dataset_summary).collect();
        Ok((StatusCode::OK, Json(json!({ "datasets": items }))))
    })
    .await
}

async fn dataset_profile(State(engine): State<Arc<Engine>>, Path(name): Path<String>) -> ApiResult {
    blocking(move || {
        let cat = engine.catalog();
        let d = cat.dataset(&name).ok_or_else(|| ApiError::not_found("dataset", &name))?;
        Ok((StatusCode::OK, Json(json!({ "name": d.name, "profile": d.profile_text }))))
    })
    .await
}

async fn list_models(State(engine): State<Arc<Engine>>) -> ApiResult {
    blocking(move || {
        let cat = engine.catalog();
        let mut items: Vec<_> = cat.models().collect();
        items.sort_by(|a, b| a.name.cmp(&b.name));
        let items: Vec<Value> = items.into_iter().map(card_summary).collect();
        Ok((StatusCode::OK, Json(json!({ "models": items }))))
    })
    .await
}

async fn model_profile(State(engine): State<Arc<Engine>>, Path(name): Path<String>) -> ApiResult {
    blocking(move || {
        let cat = engine.catalog();
        let m = cat.model(&name).ok_or_else(|| ApiError::not_found("model", &name))?;
        Ok((StatusCode::OK, Json(json!({ "name": m.name, "profile": m.profile_text }))))
    })
    .await
}
