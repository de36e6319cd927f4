//! HTTP front end for a [`SharedIndex`].
//!
//! | method | path      | body                       | response         |
//! |--------|-----------|----------------------------|------------------|
//! | POST   | `/index`  | page records (array/JSONL) | [`IndexReport`]  |
//! | POST   | `/search` | [`Query`]                  | [`SearchResult`] |
//! | GET    | `/health` | none                       | [`Health`]       |
//!
//! Every failure is answered with a JSON [`ErrorBody`] `{code, message}`.
//!
//! [`IndexReport`]: trowel::search::IndexReport
//! [`SearchResult`]: trowel::search::SearchResult

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};
use trowel::search::{load_records, Query, SharedIndex, StoreError, INDEX_FORMAT};

/// Default request body cap; bulk index requests can be large.
pub const DEFAULT_MAX_BODY_BYTES: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServerOptions {
    pub max_body_bytes: usize,
    /// Origins allowed by CORS; empty allows any origin.
    pub allow_origins: Vec<String>,
}

impl Default for ServerOptions {
    fn default() -> Self {
        ServerOptions {
            max_body_bytes: DEFAULT_MAX_BODY_BYTES,
            allow_origins: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub pages: usize,
    pub format: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            log::error!("{}: {}", self.code, self.message);
        } else {
            log::debug!("{} {}: {}", self.status.as_u16(), self.code, self.message);
        }
        let body = ErrorBody {
            code: self.code.to_string(),
            message: self.message,
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<BytesRejection> for ApiError {
    fn from(rejection: BytesRejection) -> Self {
        let status = rejection.status();
        let code = if status == StatusCode::PAYLOAD_TOO_LARGE {
            "payload_too_large"
        } else {
            "bad_request"
        };
        ApiError::new(status, code, rejection.body_text())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Record { .. } => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_record", e.to_string()),
            StoreError::Io { .. } | StoreError::Format(_) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_error", e.to_string())
            }
        }
    }
}

type AppState = Arc<SharedIndex>;

async fn health(State(index): State<AppState>) -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        pages: index.snapshot().len(),
        format: INDEX_FORMAT.into(),
    })
}

async fn index_pages(
    State(index): State<AppState>,
    body: Result<Bytes, BytesRejection>,
) -> Result<Response, ApiError> {
    let body = body?;
    let text = std::str::from_utf8(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_json", format!("body is not UTF-8: {e}")))?;
    let records = load_records(text).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_json", e.to_string()))?;
    let report = tokio::task::spawn_blocking(move || index.index(records))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    log::info!("indexed {} pages ({} replaced), {} total", report.indexed, report.replaced, report.total_pages);
    Ok(Json(report).into_response())
}

async fn search(
    State(index): State<AppState>,
    body: Result<Bytes, BytesRejection>,
) -> Result<Response, ApiError> {
    let body = body?;
    let query: Query = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_query", e.to_string()))?;
    let result = index
        .search(&query)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.code, e.message))?;
    Ok(Json(result).into_response())
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed on this endpoint")
}

fn cors(options: &ServerOptions) -> CorsLayer {
    let origins = if options.allow_origins.is_empty() {
        AllowOrigin::from(Any)
    } else {
        AllowOrigin::list(options.allow_origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()))
    };
    CorsLayer::new()
        .allow_origin(origins)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers(Any)
}

pub fn router(index: Arc<SharedIndex>, options: &ServerOptions) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/index", post(index_pages))
        .route("/search", post(search))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .layer(DefaultBodyLimit::max(options.max_body_bytes))
        .layer(cors(options))
        .with_state(index)
}

/// Serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, index: Arc<SharedIndex>, options: ServerOptions) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(index, &options))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
            log::info!("shutting down");
        })
        .await
}
