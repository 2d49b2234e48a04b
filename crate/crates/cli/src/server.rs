//! HTTP search service over an immutable snapshot.
//!
//! | method | path                                   | body / result              |
//! |--------|----------------------------------------|----------------------------|
//! | GET    | `/api/search?q=<text>`                 | search result              |
//! | POST   | `/api/search/code`                     | raw code in, search result |
//! | GET    | `/api/node/{id}`                       | node with incident edges   |
//! | GET    | `/api/node/{id}/fragment?radius=&budget=` | graph fragment          |
//! | GET    | `/api/health`                          | status and graph size      |
//!
//! Errors are `{"code": ..., "message": ...}` documents.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;

use apitask_kg::graphstore::{Direction, Edge, Node};
use apitask_kg::search::{SearchEngine, SearchError};

use crate::CliError;

type Engine = Arc<SearchEngine>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
}

/// An error response: status plus `{code, message}`.
#[derive(Debug)]
pub struct Failure(StatusCode, ApiError);

impl Failure {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Failure(
            status,
            ApiError {
                code: code.to_string(),
                message: message.into(),
            },
        )
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        let status = match e {
            SearchError::UnparsableQuery { .. } | SearchError::NoApiFound => StatusCode::BAD_REQUEST,
            SearchError::UnknownNode { .. } => StatusCode::NOT_FOUND,
            SearchError::EmptyGraph => StatusCode::SERVICE_UNAVAILABLE,
        };
        Failure::new(status, e.code(), e.to_string())
    }
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

type Reply<T> = Result<Json<T>, Failure>;

#[derive(Debug, Serialize)]
pub struct Health {
    pub status: &'static str,
    pub nodes: usize,
    pub edges: usize,
}

#[derive(Debug, Serialize)]
pub struct NodeView {
    pub node: Node,
    pub edges: Vec<Edge>,
}

pub fn router(engine: SearchEngine) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/search", get(search_text))
        .route("/api/search/code", post(search_code))
        .route("/api/node/{id}", get(node))
        .route("/api/node/{id}/fragment", get(fragment))
        .fallback(|| async { Failure::new(StatusCode::NOT_FOUND, "NotFound", "no such endpoint") })
        .with_state(Arc::new(engine))
}

async fn health(State(engine): State<Engine>) -> Json<Health> {
    let g = engine.graph();
    Json(Health {
        status: "ok",
        nodes: g.node_count(),
        edges: g.edge_count(),
    })
}

async fn search_text(State(engine): State<Engine>, Query(params): Query<HashMap<String, String>>) -> Reply<apitask_kg::search::SearchResult> {
    let q = params.get("q").map(String::as_str).unwrap_or("");
    Ok(Json(engine.search_text(q)?))
}

async fn search_code(State(engine): State<Engine>, body: Bytes) -> Reply<apitask_kg::search::SearchResult> {
    let code = std::str::from_utf8(&body).map_err(|_| Failure::new(StatusCode::BAD_REQUEST, "InvalidBody", "the body is not UTF-8 text"))?;
    Ok(Json(engine.search_code(code)?))
}

async fn node(State(engine): State<Engine>, Path(id): Path<String>) -> Reply<NodeView> {
    let g = engine.graph();
    let node = g.node(&id).cloned().ok_or_else(|| SearchError::UnknownNode { id: id.clone() })?;
    let edges = g.neighbors(&id, None, Direction::Both).map_err(SearchError::from)?.into_iter().map(|(e, _)| e).collect();
    Ok(Json(NodeView { node, edges }))
}

fn param(params: &HashMap<String, String>, name: &str, default: usize) -> Result<usize, Failure> {
    match params.get(name).map(String::as_str) {
        None | Some("") => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Failure::new(StatusCode::BAD_REQUEST, "InvalidParameter", format!("{name} must be a non-negative integer, got {v:?}"))),
    }
}

async fn fragment(
    State(engine): State<Engine>,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> Reply<apitask_kg::search::GraphFragment> {
    let radius = param(&params, "radius", engine.config.radius)?;
    let budget = param(&params, "budget", engine.config.budget)?;
    Ok(Json(engine.fragment(&id, radius, budget)?))
}

/// Bind `addr` and serve until interrupted.
pub async fn serve(engine: SearchEngine, addr: SocketAddr, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|source| CliError::Bind { addr, source })?;
    let local = listener.local_addr()?;
    writeln!(out, "serving {} nodes on http://{local}", engine.graph().node_count())?;
    out.flush()?;
    axum::serve(listener, router(engine))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
