//! HTTP surface of a live session for the annotation client.
//!
//! | route                    | effect                                        |
//! |--------------------------|-----------------------------------------------|
//! | `GET /api/session`       | phase, pending/total counts, status, scales   |
//! | `GET /api/batch`         | blinded pending items (`?all=true` for all)   |
//! | `POST /api/scores`       | array of annotation records                   |
//! | `POST /api/phase/advance`| run the next selection phase                  |
//! | `GET /api/report`        | annotated rankings and agreement              |
//!
//! Readers share the session; every mutation takes the write lock and is
//! persisted before the response is sent.

use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;

use crate::engine::AnnotationRecord;
use crate::error::{Error, Result};
use crate::session::{BatchFile, Session};

pub type SharedSession = Arc<RwLock<Session<'static>>>;

#[derive(Debug, Serialize, Deserialize)]
pub struct ApiError {
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_id: Option<String>,
}

struct Failure(Error);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e)
    }
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        let (status, sample_id) = match &self.0 {
            Error::AnnotationRejected { sample_id, .. } | Error::InvalidSample { sample_id, .. } => {
                (StatusCode::BAD_REQUEST, Some(sample_id.clone()))
            }
            Error::IncompleteAnnotation(id) => (StatusCode::CONFLICT, Some(id.clone())),
            Error::WrongStatus { .. } | Error::Locked(_) => (StatusCode::CONFLICT, None),
            Error::InvalidInput(_) | Error::Json(_) => (StatusCode::BAD_REQUEST, None),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, None),
        };
        let body = ApiError {
            error: self.0.to_string(),
            sample_id,
        };
        (status, Json(body)).into_response()
    }
}

#[derive(Debug, Default, Deserialize)]
struct BatchQuery {
    #[serde(default)]
    all: bool,
}

async fn session_view(State(s): State<SharedSession>) -> impl IntoResponse {
    Json(s.read().await.summary())
}

async fn batch(
    State(s): State<SharedSession>,
    Query(q): Query<BatchQuery>,
) -> std::result::Result<Json<Option<BatchFile>>, Failure> {
    Ok(Json(s.read().await.batch(!q.all)))
}

async fn scores(
    State(s): State<SharedSession>,
    Json(records): Json<Vec<AnnotationRecord>>,
) -> std::result::Result<Response, Failure> {
    let summary = s.write().await.ingest(&records)?;
    Ok(Json(summary).into_response())
}

async fn advance(State(s): State<SharedSession>) -> std::result::Result<Response, Failure> {
    let mut guard = s.write().await;
    let batch = guard.advance()?;
    Ok(Json(serde_json::json!({
        "session": guard.summary(),
        "batch": batch,
    }))
    .into_response())
}

#[derive(Debug, Deserialize)]
struct ReportQuery {
    #[serde(default = "default_alpha")]
    alpha: f64,
}

fn default_alpha() -> f64 {
    0.05
}

async fn report(
    State(s): State<SharedSession>,
    Query(q): Query<ReportQuery>,
) -> std::result::Result<Response, Failure> {
    let r = s.read().await.report(q.alpha)?;
    Ok(Json(r).into_response())
}

pub fn router(session: SharedSession) -> Router {
    Router::new()
        .route("/api/session", get(session_view))
        .route("/api/batch", get(batch))
        .route("/api/scores", post(scores))
        .route("/api/phase/advance", post(advance))
        .route("/api/report", get(report))
        .with_state(session)
}

/// Binds `addr` and serves until interrupted.
pub async fn serve(session: Session<'static>, addr: &str) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::io(addr, e))?;
    let app = router(Arc::new(RwLock::new(session)));
    eprintln!("listening on http://{addr}");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::io(addr, e))
}
