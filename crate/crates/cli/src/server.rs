//! JSON HTTP API over an immutable cube snapshot.
//!
//! Handlers clone the current `Arc<Snapshot>` and release the lock before
//! doing any work; `POST /api/reload` builds a new snapshot off-lock and
//! swaps the pointer, so in-flight requests finish on the snapshot they
//! started with.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;

use crate::error::AppError;
use crate::snapshot::{
    count_payload, cube_payload, parse_filter, ApiPivotRequest, DrillRequest, RollupRequest,
    Snapshot,
};

pub struct AppState {
    manifest_path: PathBuf,
    current: RwLock<Arc<Snapshot>>,
}

impl AppState {
    pub fn new(manifest_path: PathBuf, snapshot: Snapshot) -> Self {
        Self {
            manifest_path,
            current: RwLock::new(Arc::new(snapshot)),
        }
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        Arc::clone(&self.current.read().unwrap_or_else(|e| e.into_inner()))
    }

    /// Loads the manifest again and swaps it in. On failure the old snapshot
    /// stays live.
    pub fn reload(&self) -> Result<Arc<Snapshot>, AppError> {
        let fresh = Arc::new(Snapshot::load(&self.manifest_path)?);
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = Arc::clone(&fresh);
        Ok(fresh)
    }
}

type Shared = Arc<AppState>;

struct ApiError(AppError);

impl<E: Into<AppError>> From<E> for ApiError {
    fn from(e: E) -> Self {
        ApiError(e.into())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = if self.0.is_caller_fault() {
            StatusCode::BAD_REQUEST
        } else {
            StatusCode::INTERNAL_SERVER_ERROR
        };
        envelope(status, self.0.code(), &self.0.to_string())
    }
}

fn envelope(status: StatusCode, code: &str, message: &str) -> Response {
    (
        status,
        Json(json!({ "error": { "code": code, "message": message } })),
    )
        .into_response()
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError(AppError::Usage(e.body_text())))
}

fn query_pairs(
    query: Result<Query<Vec<(String, String)>>, QueryRejection>,
) -> Result<Vec<(String, String)>, ApiError> {
    query
        .map(|Query(v)| v)
        .map_err(|e| ApiError(AppError::Usage(e.body_text())))
}

fn values<'a>(pairs: &'a [(String, String)], key: &str) -> Vec<&'a str> {
    pairs
        .iter()
        .filter(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .collect()
}

fn single<'a>(pairs: &'a [(String, String)], key: &str) -> Result<Option<&'a str>, ApiError> {
    match values(pairs, key).as_slice() {
        [] => Ok(None),
        [v] => Ok(Some(v)),
        _ => Err(ApiError(AppError::Usage(format!(
            "query parameter `{key}` given more than once"
        )))),
    }
}

fn parse_number<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, ApiError> {
    raw.parse().map_err(|_| {
        ApiError(AppError::Usage(format!(
            "`{key}` must be a non-negative integer"
        )))
    })
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/schema", get(schema))
        .route("/api/total", get(total))
        .route("/api/pivot", post(pivot))
        .route("/api/rollup", post(rollup))
        .route("/api/drill", post(drill))
        .route("/api/views", get(views))
        .route("/api/views/count", get(views_count))
        .route("/api/chart", get(chart))
        .route("/api/reload", post(reload))
        .fallback(|| async { envelope(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .with_state(state)
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn schema(State(state): State<Shared>) -> Json<serde_json::Value> {
    Json(state.snapshot().schema_payload())
}

/// `?filter=DIM=v1,v2`, repeatable.
async fn total(
    State(state): State<Shared>,
    query: Result<Query<Vec<(String, String)>>, QueryRejection>,
) -> ApiResult<serde_json::Value> {
    let pairs = query_pairs(query)?;
    let filter = parse_filter(&values(&pairs, "filter"))?;
    Ok(Json(state.snapshot().total(&filter)?))
}

async fn pivot(
    State(state): State<Shared>,
    payload: Result<Json<ApiPivotRequest>, JsonRejection>,
) -> ApiResult<pivotcube::PivotReport> {
    let request = body(payload)?;
    Ok(Json(state.snapshot().pivot(&request)?))
}

async fn rollup(
    State(state): State<Shared>,
    payload: Result<Json<RollupRequest>, JsonRejection>,
) -> ApiResult<serde_json::Value> {
    let request = body(payload)?;
    Ok(Json(cube_payload(&state.snapshot().rollup(&request)?)))
}

async fn drill(
    State(state): State<Shared>,
    payload: Result<Json<DrillRequest>, JsonRejection>,
) -> ApiResult<pivotcube::DrillResult> {
    let request = body(payload)?;
    Ok(Json(state.snapshot().drill(&request)?))
}

/// `?r=N`, enumerating over the loaded schema's dimensions.
async fn views(
    State(state): State<Shared>,
    query: Result<Query<Vec<(String, String)>>, QueryRejection>,
) -> ApiResult<serde_json::Value> {
    let pairs = query_pairs(query)?;
    let r = single(&pairs, "r")?
        .ok_or_else(|| ApiError(AppError::Usage("missing query parameter `r`".into())))?;
    let r: usize = parse_number("r", r)?;
    Ok(Json(state.snapshot().views(r)?))
}

/// `?n=K`; defaults to the loaded schema's dimension count.
async fn views_count(
    State(state): State<Shared>,
    query: Result<Query<Vec<(String, String)>>, QueryRejection>,
) -> ApiResult<pivotcube::combinatorics::ViewCount> {
    let pairs = query_pairs(query)?;
    let n = match single(&pairs, "n")? {
        Some(raw) => parse_number("n", raw)?,
        None => state.snapshot().cube().n() as u64,
    };
    Ok(Json(count_payload(n)?))
}

/// `?horizontal=H&vertical=V1&vertical=V2&filter=DIM=v`; verticals are
/// taken in display order.
async fn chart(
    State(state): State<Shared>,
    query: Result<Query<Vec<(String, String)>>, QueryRejection>,
) -> ApiResult<pivotcube::ChartData> {
    let pairs = query_pairs(query)?;
    let horizontal = single(&pairs, "horizontal")?.ok_or_else(|| {
        ApiError(AppError::Usage(
            "missing query parameter `horizontal`".into(),
        ))
    })?;
    let filter = parse_filter(&values(&pairs, "filter"))?;
    let request = ApiPivotRequest {
        horizontal: horizontal.to_owned(),
        verticals: values(&pairs, "vertical")
            .into_iter()
            .map(str::to_owned)
            .collect(),
        filter: filter
            .clauses()
            .iter()
            .map(|(k, v)| (k.clone(), v.iter().cloned().collect()))
            .collect(),
        display_vertical_order: None,
    };
    Ok(Json(state.snapshot().chart(&request)?))
}

#[derive(Serialize)]
struct Reloaded {
    status: &'static str,
    rows: usize,
}

async fn reload(State(state): State<Shared>) -> ApiResult<Reloaded> {
    let state = Arc::clone(&state);
    let fresh = tokio::task::spawn_blocking(move || state.reload())
        .await
        .map_err(|e| ApiError(AppError::Io(std::io::Error::other(e))))??;
    Ok(Json(Reloaded {
        status: "reloaded",
        rows: fresh.cube().len(),
    }))
}

/// Binds `addr` and serves until interrupted.
pub async fn serve(
    manifest_path: PathBuf,
    snapshot: Snapshot,
    addr: SocketAddr,
) -> Result<(), AppError> {
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| {
        if e.kind() == std::io::ErrorKind::AddrInUse {
            AppError::PortInUse(addr.to_string())
        } else {
            AppError::Io(e)
        }
    })?;
    log::info!(
        "serving {} on http://{}",
        manifest_path.display(),
        listener.local_addr()?
    );
    let state = Arc::new(AppState::new(manifest_path, snapshot));
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

pub fn serve_blocking(
    manifest_path: PathBuf,
    snapshot: Snapshot,
    addr: SocketAddr,
) -> Result<(), AppError> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(serve(manifest_path, snapshot, addr))
}
