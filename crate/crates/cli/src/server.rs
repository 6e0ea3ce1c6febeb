use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use repairscope::session::{ClusteringParams, SessionStore};
use repairscope::{to_json, Error, QueryRequest, Session, SessionConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;
use tower_http::trace::TraceLayer;

#[derive(Debug, Default)]
pub struct AppState {
    pub store: SessionStore,
}

#[derive(Debug, Deserialize)]
struct CreateBody {
    kb_text: String,
    #[serde(default)]
    config: Option<SessionConfig>,
}

#[derive(Debug, Deserialize)]
struct PathBody {
    path: String,
}

#[derive(Debug, Serialize)]
struct SavedBody<'a> {
    id: &'a str,
    path: &'a str,
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: ErrorDetail,
}

#[derive(Debug, Serialize)]
struct ErrorDetail {
    kind: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    column: Option<usize>,
}

/// An error as sent to HTTP clients.
#[derive(Debug)]
pub enum ApiError {
    Domain(Error),
    UnknownSession(String),
    BadBody(String),
    Internal(String),
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError::Domain(e)
    }
}

pub fn status_for(e: &Error) -> StatusCode {
    match e {
        Error::RoundCapExceeded { .. } => StatusCode::UNPROCESSABLE_ENTITY,
        _ => StatusCode::BAD_REQUEST,
    }
}

fn kind_of(e: &Error) -> &'static str {
    match e {
        Error::Syntax { .. } => "syntax",
        Error::ArityMismatch { .. } => "arity_mismatch",
        Error::NonGroundFact { .. } => "non_ground_fact",
        Error::RoundCapExceeded { .. } => "round_cap_exceeded",
        Error::TooManyFacts { .. } => "too_many_facts",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::InvalidMatrix(_) => "invalid_matrix",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::IsolatedVertex { .. } => "isolated_vertex",
        Error::EmptyScope => "empty_scope",
        Error::UnknownRepair(_) => "unknown_repair",
        Error::VersionMismatch { .. } => "version_mismatch",
        Error::Format(_) => "format",
        Error::Io(_) => "io",
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, detail) = match self {
            ApiError::Domain(e) => {
                let (line, column) = match &e {
                    Error::Syntax { line, column, .. } => (Some(*line), Some(*column)),
                    Error::ArityMismatch { line, .. } | Error::NonGroundFact { line, .. } => {
                        (Some(*line), None)
                    }
                    _ => (None, None),
                };
                let detail = ErrorDetail {
                    kind: kind_of(&e),
                    message: e.to_string(),
                    line,
                    column,
                };
                (status_for(&e), detail)
            }
            ApiError::UnknownSession(id) => (
                StatusCode::NOT_FOUND,
                ErrorDetail {
                    kind: "unknown_session",
                    message: format!("no session with id `{id}`"),
                    line: None,
                    column: None,
                },
            ),
            ApiError::Internal(message) => (
                StatusCode::INTERNAL_SERVER_ERROR,
                ErrorDetail {
                    kind: "internal",
                    message,
                    line: None,
                    column: None,
                },
            ),
            ApiError::BadBody(message) => (
                StatusCode::BAD_REQUEST,
                ErrorDetail {
                    kind: "bad_request",
                    message,
                    line: None,
                    column: None,
                },
            ),
        };
        (status, json_body(&ErrorBody { error: detail })).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

/// JSON response bytes, identical to what the CLI prints.
fn json_body<T: Serialize>(value: &T) -> Response {
    let mut text = to_json(value);
    text.push('\n');
    ([(header::CONTENT_TYPE, "application/json")], text).into_response()
}

fn parse_body<T: DeserializeOwned>(bytes: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::BadBody(e.to_string()))
}

fn session(state: &AppState, id: &str) -> ApiResult<Arc<Session>> {
    state
        .store
        .get(id)
        .ok_or_else(|| ApiError::UnknownSession(id.to_owned()))
}

/// Runs CPU-bound pipeline work off the async executor.
async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> ApiResult<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let body: CreateBody = parse_body(&body)?;
    let session = blocking(move || {
        Ok(Session::create(
            &body.kb_text,
            body.config.unwrap_or_default(),
        )?)
    })
    .await?;
    let session = state.store.insert(session);
    Ok((StatusCode::CREATED, json_body(&session.summary())).into_response())
}

async fn analysis(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    params: Result<Query<ClusteringParams>, axum::extract::rejection::QueryRejection>,
) -> ApiResult<Response> {
    let Query(params) = params.map_err(|e| ApiError::BadBody(e.body_text()))?;
    let s = session(&state, &id)?;
    let method = params.to_method()?;
    let doc = blocking(move || Ok(s.analysis(method.as_ref())?)).await?;
    Ok(json_body(&doc))
}

async fn query(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let s = session(&state, &id)?;
    let request: QueryRequest = parse_body(&body)?;
    let answer = blocking(move || Ok(s.answer_query(&request)?)).await?;
    Ok(json_body(&answer))
}

async fn matrix_csv(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Response> {
    let s = session(&state, &id)?;
    Ok(([(header::CONTENT_TYPE, "text/csv")], s.matrix().to_csv()).into_response())
}

async fn save(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let s = session(&state, &id)?;
    let PathBody { path } = parse_body(&body)?;
    let path = blocking(move || {
        s.save(&path)?;
        Ok(path)
    })
    .await?;
    Ok(json_body(&SavedBody {
        id: &id,
        path: &path,
    }))
}

async fn load(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let PathBody { path } = parse_body(&body)?;
    let session = blocking(move || Ok(Session::load(&path)?)).await?;
    let session = state.store.insert(session);
    Ok(json_body(&session.summary()))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/load", post(load))
        .route("/sessions/{id}/analysis", get(analysis))
        .route("/sessions/{id}/query", post(query))
        .route("/sessions/{id}/matrix.csv", get(matrix_csv))
        .route("/sessions/{id}/save", post(save))
        .layer(CorsLayer::permissive())
        .layer(TraceLayer::new_for_http())
        .with_state(state)
}

pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(AppState::default())))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
