//! HTTP front end for extraction and operator review.
//!
//! | method | path | body | response |
//! |---|---|---|---|
//! | POST | `/v1/extract` | multipart: `image`, optional `ocr_dump` | [`StoredResult`] |
//! | GET | `/v1/records/{id}` | | [`StoredResult`] |
//! | GET | `/v1/review/queue` | | pending [`StoredResult`]s, oldest first |
//! | POST | `/v1/records/{id}/corrections` | [`CorrectionRequest`] | [`StoredResult`] |
//! | GET | `/v1/health` | | `{"status":"ok","records":n}` |
//! | GET | `/v1/schema` | | [`SchemaDescription`] |
//!
//! Errors are `{"error": kind, "message": text}` with 400 (bad upload),
//! 404 (unknown record), 409 (stale revision or auto-accepted record),
//! 422 (invalid field value), 502/503 (OCR engine) or 500.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::extract::{DefaultBodyLimit, Multipart, Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::Pipeline;
use crate::schema::{describe, SchemaDescription};
use crate::store::{record_id, Store, StoredResult};

pub const MAX_UPLOAD_BYTES: usize = 32 * 1024 * 1024;

#[derive(Clone)]
pub struct AppState {
    pipeline: Arc<Pipeline>,
    store: Arc<Mutex<Store>>,
}

impl AppState {
    pub fn new(pipeline: Pipeline, store: Store) -> Self {
        Self {
            pipeline: Arc::new(pipeline),
            store: Arc::new(Mutex::new(store)),
        }
    }

    fn store(&self) -> std::sync::MutexGuard<'_, Store> {
        self.store.lock().unwrap_or_else(|p| p.into_inner())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionRequest {
    pub revision: u64,
    #[serde(default)]
    pub corrections: BTreeMap<String, String>,
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: &'static str,
    message: String,
}

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        Self(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind) = match &self.0 {
            Error::UnknownRecord(_) => (StatusCode::NOT_FOUND, "unknown-record"),
            Error::Conflict { .. } => (StatusCode::CONFLICT, "revision-conflict"),
            Error::Terminal(_) => (StatusCode::CONFLICT, "auto-accepted"),
            Error::Validation { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "validation"),
            Error::Decode(_) | Error::UnsupportedDepth(_) | Error::Geometry(_) => {
                (StatusCode::BAD_REQUEST, "bad-image")
            }
            Error::Parse { .. } => (StatusCode::BAD_REQUEST, "bad-word-dump"),
            Error::Config(_) => (StatusCode::BAD_REQUEST, "bad-request"),
            Error::EngineUnavailable { .. } => (StatusCode::SERVICE_UNAVAILABLE, "engine-unavailable"),
            Error::EngineFailure { .. } => (StatusCode::BAD_GATEWAY, "engine-failure"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        let body = ErrorBody {
            error: kind,
            message: self.0.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = std::result::Result<Json<T>, ApiError>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/extract", post(extract))
        .route("/v1/records/{id}", get(get_record))
        .route("/v1/records/{id}/corrections", post(correct))
        .route("/v1/review/queue", get(queue))
        .route("/v1/health", get(health))
        .route("/v1/schema", get(schema))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(state)
}

fn bad_request(message: impl Into<String>) -> ApiError {
    ApiError(Error::Config(message.into()))
}

async fn extract(State(state): State<AppState>, mut multipart: Multipart) -> ApiResult<StoredResult> {
    let mut image: Option<Vec<u8>> = None;
    let mut dump: Option<String> = None;
    while let Some(field) = multipart
        .next_field()
        .await
        .map_err(|e| bad_request(format!("multipart: {e}")))?
    {
        match field.name() {
            Some("image") => {
                let bytes = field
                    .bytes()
                    .await
                    .map_err(|e| bad_request(format!("image part: {e}")))?;
                image = Some(bytes.to_vec());
            }
            Some("ocr_dump") => {
                dump = Some(
                    field
                        .text()
                        .await
                        .map_err(|e| bad_request(format!("ocr_dump part: {e}")))?,
                );
            }
            _ => {}
        }
    }
    let image = image.ok_or_else(|| bad_request("missing multipart part `image`"))?;
    let id = record_id(&image);
    if let Some(existing) = state.store().get(&id) {
        return Ok(Json(existing.clone()));
    }
    let pipeline = state.pipeline.clone();
    let extraction = tokio::task::spawn_blocking(move || pipeline.extract(&image, dump.as_deref()))
        .await
        .map_err(|e| ApiError(Error::Consistency(format!("extraction task: {e}"))))??;
    let stored = state
        .store()
        .insert_extraction(&id, extraction.record, extraction.flagged)?;
    Ok(Json(stored))
}

async fn get_record(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<StoredResult> {
    let store = state.store();
    let r = store.get(&id).ok_or(Error::UnknownRecord(id))?;
    Ok(Json(r.clone()))
}

async fn correct(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<CorrectionRequest>,
) -> ApiResult<StoredResult> {
    let updated = state.store().apply_corrections(&id, req.revision, &req.corrections)?;
    Ok(Json(updated))
}

async fn queue(State(state): State<AppState>) -> ApiResult<Vec<StoredResult>> {
    Ok(Json(state.store().review_queue().into_iter().cloned().collect()))
}

async fn health(State(state): State<AppState>) -> Json<serde_json::Value> {
    Json(serde_json::json!({"status": "ok", "records": state.store().len()}))
}

async fn schema(State(state): State<AppState>) -> Json<SchemaDescription> {
    Json(describe(state.pipeline.config().confidence_review_threshold))
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(state: AppState, addr: SocketAddr) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await?;
    Ok(())
}
