//! HTTP JSON API over a loaded [`KnowledgeBase`].
//!
//! Routes live under `/api/v1`; anything else is served from the optional
//! static-asset directory (the built web UI).

use std::future::Future;
use std::io;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use agilekb_core::kb::{KbError, KnowledgeBase, TeamProfile};
use agilekb_core::rules::ReasonError;
use axum::body::Bytes;
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::sync::Semaphore;
use tower_http::services::ServeDir;

/// Seconds a client is asked to wait after a 503.
pub const RETRY_AFTER_SECS: u64 = 1;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    /// Recommendations computed at once; further requests get 503.
    pub workers: usize,
    pub static_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            workers: 16,
            static_dir: None,
        }
    }
}

/// The JSON error body. `status` is carried by the response itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Vec<serde_json::Value>>,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> ApiError {
        ApiError {
            status: status.as_u16(),
            code: code.to_owned(),
            message: message.into(),
            details: None,
        }
    }

    fn internal() -> ApiError {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", "internal error")
    }

    fn unavailable(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "unavailable", message)
    }
}

impl From<KbError> for ApiError {
    fn from(e: KbError) -> ApiError {
        match e {
            KbError::UnknownConcern(_) => ApiError::new(StatusCode::NOT_FOUND, "unknown_concern", e.to_string()),
            KbError::MissingParameter { .. } | KbError::InvalidParameter { .. } => {
                ApiError::new(StatusCode::BAD_REQUEST, "invalid_parameter", e.to_string())
            }
            KbError::InvalidProfile(ref issues) => {
                let details = issues
                    .iter()
                    .map(|i| serde_json::to_value(i).expect("issues serialize"))
                    .collect();
                ApiError {
                    details: Some(details),
                    ..ApiError::new(StatusCode::BAD_REQUEST, "invalid_profile", "invalid team profile")
                }
            }
            KbError::Reason(ReasonError::ResourceLimit { .. }) => ApiError::unavailable(e.to_string()),
            other => {
                tracing::error!(error = %other, "request failed");
                ApiError::internal()
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let mut resp = (status, Json(&self)).into_response();
        if status == StatusCode::SERVICE_UNAVAILABLE {
            resp.headers_mut()
                .insert(header::RETRY_AFTER, HeaderValue::from(RETRY_AFTER_SECS));
        }
        resp
    }
}

#[derive(Clone)]
struct AppState {
    kb: Arc<KnowledgeBase>,
    workers: Arc<Semaphore>,
}

/// Runs blocking KB work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, KbError> + Send + 'static) -> Result<T, ApiError> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError::from),
        Err(e) => {
            tracing::error!(error = %e, "worker task failed");
            Err(ApiError::internal())
        }
    }
}

/// JSON text that is already serialized.
fn json_text(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn list_concerns(State(st): State<AppState>) -> Response {
    Json(st.kb.list_concerns()).into_response()
}

#[derive(Deserialize)]
struct ResultsParams {
    practice: Option<String>,
}

async fn concern_results(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<ResultsParams>,
) -> Result<Response, ApiError> {
    let kb = Arc::clone(&st.kb);
    let table = blocking(move || kb.answer_concern(&id, params.practice.as_deref())).await?;
    Ok(json_text(table.to_json()))
}

async fn recommendations(State(st): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let profile: TeamProfile = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "parse_error", e.to_string()))?;
    let permit = Arc::clone(&st.workers)
        .try_acquire_owned()
        .map_err(|_| ApiError::unavailable("all recommendation workers are busy"))?;
    let kb = Arc::clone(&st.kb);
    let report = blocking(move || {
        let _permit = permit;
        kb.recommend(&profile)
    })
    .await?;
    Ok(Json(report).into_response())
}

async fn catalog(State(st): State<AppState>) -> Response {
    Json(st.kb.catalog()).into_response()
}

async fn api_not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

async fn access_log(req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let uri = req.uri().clone();
    let start = Instant::now();
    let resp = next.run(req).await;
    tracing::info!(
        target: "access",
        "{} {} {} {}ms",
        method,
        uri,
        resp.status().as_u16(),
        start.elapsed().as_millis()
    );
    resp
}

pub fn router(kb: Arc<KnowledgeBase>, config: &ServerConfig) -> Router {
    let state = AppState {
        kb,
        workers: Arc::new(Semaphore::new(config.workers.max(1))),
    };
    let api = Router::new()
        .route("/concerns", get(list_concerns))
        .route("/concerns/{id}/results", get(concern_results))
        .route("/recommendations", post(recommendations))
        .route("/catalog", get(catalog))
        .fallback(api_not_found)
        .with_state(state);
    let mut app = Router::new().nest("/api/v1", api);
    if let Some(dir) = &config.static_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    app.layer(middleware::from_fn(access_log))
}

/// Serves `app` on `listener` until `shutdown` resolves, then lets
/// in-flight requests finish.
pub async fn serve(listener: TcpListener, app: Router, shutdown: impl Future<Output = ()> + Send + 'static) -> io::Result<()> {
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}

