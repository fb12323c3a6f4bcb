use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;
use wikidir::dialect::Policy;
use wikidir::Decision;

use crate::store::{Store, StoreError};

/// Largest batch `GET /candidates` hands out.
pub const MAX_BATCH: usize = 50;

type Shared = Arc<Mutex<Store>>;

pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub static_dir: Option<PathBuf>,
}

struct ApiError(StatusCode, String);

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self(StatusCode::BAD_REQUEST, message.into())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match &e {
            StoreError::UnknownCandidate(_) => StatusCode::NOT_FOUND,
            StoreError::UnknownDialect(_) | StoreError::EmptyAnnotator => StatusCode::BAD_REQUEST,
            StoreError::NoOverlap(_) => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({"error": self.1, "status": self.0.as_u16()}))).into_response()
    }
}

fn lock(state: &Shared) -> std::sync::MutexGuard<'_, Store> {
    // A panic while holding the lock cannot leave a half-written judgment in
    // memory: the log line is synced before the in-memory push.
    state.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

pub fn router(store: Store, static_dir: Option<PathBuf>) -> Router {
    let state: Shared = Arc::new(Mutex::new(store));
    let api = Router::new()
        .route("/candidates", get(candidates))
        .route("/judgments", post(judgments))
        .route("/agreement", get(agreement))
        .route("/dictionary/export", get(export))
        .route("/progress", get(progress))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(store: Store, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    log::info!("annotation service listening on {}", listener.local_addr()?);
    axum::serve(listener, router(store, config.static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[derive(Deserialize)]
struct BatchParams {
    annotator: Option<String>,
    dialect: Option<String>,
    n: Option<String>,
    review: Option<bool>,
}

fn annotator_from(param: Option<String>, headers: &HeaderMap) -> Result<String, ApiError> {
    param
        .or_else(|| headers.get("x-annotator-id").and_then(|v| v.to_str().ok()).map(str::to_owned))
        .filter(|a| !a.trim().is_empty())
        .ok_or_else(|| ApiError::bad_request("missing annotator"))
}

async fn candidates(State(state): State<Shared>, headers: HeaderMap, Query(params): Query<BatchParams>) -> Result<Json<Value>, ApiError> {
    let annotator = annotator_from(params.annotator, &headers)?;
    let n = match params.n.as_deref() {
        None => 10,
        Some(raw) => raw
            .parse::<usize>()
            .ok()
            .filter(|n| (1..=MAX_BATCH).contains(n))
            .ok_or_else(|| ApiError::bad_request(format!("n must be between 1 and {MAX_BATCH}")))?,
    };
    let batch = lock(&state).next_batch(&annotator, params.dialect.as_deref(), n, params.review.unwrap_or(false))?;
    Ok(Json(json!({"annotator": annotator, "candidates": batch})))
}

async fn judgments(State(state): State<Shared>, headers: HeaderMap, body: String) -> Result<Json<Value>, ApiError> {
    let value: Value = serde_json::from_str(&body).map_err(|e| ApiError::bad_request(format!("invalid JSON: {e}")))?;
    let field = |name: &str| value.get(name).and_then(Value::as_str).map(str::to_owned);
    let annotator = annotator_from(field("annotator_id"), &headers)?;
    let candidate = field("candidate_id").ok_or_else(|| ApiError::bad_request("missing candidate_id"))?;
    let decision: Decision = field("decision")
        .ok_or_else(|| ApiError::bad_request("missing decision"))?
        .parse()
        .map_err(ApiError::bad_request)?;
    let ack = lock(&state).submit(&annotator, &candidate, decision, chrono::Utc::now())?;
    Ok(Json(serde_json::to_value(ack).expect("ack serializes")))
}

#[derive(Deserialize)]
struct PairParams {
    a: Option<String>,
    b: Option<String>,
}

async fn agreement(State(state): State<Shared>, Query(params): Query<PairParams>) -> Result<Json<Value>, ApiError> {
    let (Some(a), Some(b)) = (params.a, params.b) else {
        return Err(ApiError::bad_request("both a and b are required"));
    };
    let report = lock(&state).agreement(&a, &b)?;
    Ok(Json(serde_json::to_value(report).expect("report serializes")))
}

#[derive(Deserialize)]
struct ExportParams {
    policy: Option<String>,
    format: Option<String>,
}

async fn export(State(state): State<Shared>, Query(params): Query<ExportParams>) -> Result<Response, ApiError> {
    let policy = params.policy.as_deref().map(str::parse::<Policy>).transpose().map_err(ApiError::bad_request)?;
    let (dict, policy) = lock(&state).dictionary(policy)?;
    match params.format.as_deref().unwrap_or("json") {
        "json" => Ok(Json(json!({"policy": policy, "entries": dict.to_json()})).into_response()),
        "tsv" => {
            let mut out = Vec::new();
            dict.write_tsv(&mut out).map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
            let body = String::from_utf8(out).expect("dictionary is UTF-8");
            Ok(([(header::CONTENT_TYPE, "text/tab-separated-values; charset=utf-8")], body).into_response())
        }
        other => Err(ApiError::bad_request(format!("unknown format {other:?}; expected json or tsv"))),
    }
}

async fn progress(State(state): State<Shared>) -> Json<Value> {
    Json(serde_json::to_value(lock(&state).progress()).expect("progress serializes"))
}
