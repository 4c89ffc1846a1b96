use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use std::future::Future;
use std::sync::Arc;

use advqa_core::buzzer::Granularity;
use advqa_core::corpus::{AnswerLabel, ValidationVerdict};

use crate::error::ServiceError;
use crate::service::{ModelSummary, Service};
use crate::session::{EditEvent, EditSession, EvalOptions, EvidenceTarget, SessionInfo, SessionState, TrajectoryPoint};
use crate::store::IndexEntry;

/// Default page size of the answer picker.
pub const ANSWER_PAGE: usize = 50;

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error_code: String,
    pub message: String,
}

struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError(ServiceError::InvalidRequest(e.body_text()))
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError(ServiceError::InvalidRequest(e.body_text()))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.0.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        if status.is_server_error() {
            log::error!("{}", self.0);
        }
        let body = ErrorBody {
            error_code: self.0.code().to_string(),
            message: self.0.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Runs a service call off the async workers; model evaluation and log fsyncs block.
async fn blocking<T, F>(svc: Arc<Service>, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&Service) -> Result<T, ServiceError> + Send + 'static,
{
    match tokio::task::spawn_blocking(move || f(&svc)).await {
        Ok(r) => r.map_err(ApiError),
        Err(e) => Err(ApiError(ServiceError::InvalidRequest(format!("request aborted: {e}")))),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateSessionRequest {
    pub author_id: String,
    pub model_id: String,
    pub answer: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DraftRequest {
    pub text: String,
    #[serde(default)]
    pub granularity: Option<Granularity>,
    #[serde(default)]
    pub target: Option<EvidenceTarget>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessView {
    pub answer: String,
    pub class_index: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuzzView {
    pub first: Option<f64>,
    pub stable: Option<f64>,
    pub granularity: Granularity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceView {
    pub tokens: Vec<String>,
    pub weights: Vec<f64>,
    pub class_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DraftResponse {
    pub session_id: String,
    pub seq: u64,
    pub guesses: Vec<GuessView>,
    pub buzz: BuzzView,
    pub evidence: EvidenceView,
    pub top1_correct: bool,
}

impl DraftResponse {
    pub fn from_event(session_id: &str, e: &EditEvent) -> Self {
        let fb = &e.feedback;
        DraftResponse {
            session_id: session_id.to_string(),
            seq: e.seq,
            guesses: fb
                .guesses
                .iter()
                .map(|g| GuessView {
                    answer: g.answer.canonical_name.clone(),
                    class_index: g.answer.class_index,
                    score: g.score,
                })
                .collect(),
            buzz: BuzzView {
                first: fb.buzz.first_correct_fraction,
                stable: fb.buzz.stable_correct_fraction,
                granularity: fb.buzz.granularity,
            },
            evidence: EvidenceView {
                tokens: fb.tokens.iter().cloned().collect(),
                weights: fb.evidence.weights.clone(),
                class_index: fb.evidence_class,
            },
            top1_correct: fb.top1_correct,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SubmitResponse {
    #[serde(flatten)]
    pub verdict: ValidationVerdict,
    pub state: SessionState,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrajectoryResponse {
    pub session_id: String,
    pub points: Vec<TrajectoryPoint>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AnswersQuery {
    #[serde(default)]
    pub prefix: String,
    pub model: Option<String>,
    pub limit: Option<usize>,
}

async fn create_session(
    State(svc): State<Arc<Service>>,
    body: Result<Json<CreateSessionRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionInfo>), ApiError> {
    let Json(req) = body?;
    let info = blocking(svc, move |s| s.create_session(&req.author_id, &req.model_id, &req.answer)).await?;
    Ok((StatusCode::CREATED, Json(info)))
}

async fn list_sessions(State(svc): State<Arc<Service>>) -> Json<Vec<IndexEntry>> {
    Json(svc.sessions())
}

async fn get_session(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> ApiResult<EditSession> {
    Ok(Json(blocking(svc, move |s| s.get_session(&id)).await?))
}

async fn draft(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    body: Result<Json<DraftRequest>, JsonRejection>,
) -> ApiResult<DraftResponse> {
    let Json(req) = body?;
    let defaults = EvalOptions::default();
    let options = EvalOptions {
        granularity: req.granularity.unwrap_or(defaults.granularity),
        target: req.target.unwrap_or(defaults.target),
    };
    let event = blocking(svc, {
        let id = id.clone();
        move |s| s.evaluate_draft(&id, &req.text, options)
    })
    .await?;
    Ok(Json(DraftResponse::from_event(&id, &event)))
}

async fn submit(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> ApiResult<SubmitResponse> {
    let (verdict, state) = blocking(svc, move |s| {
        let verdict = s.submit(&id)?;
        Ok((verdict, s.get_session(&id)?.info.state))
    })
    .await?;
    Ok(Json(SubmitResponse { verdict, state }))
}

async fn abandon(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> ApiResult<SessionInfo> {
    Ok(Json(blocking(svc, move |s| s.abandon(&id)).await?))
}

async fn trajectory(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> ApiResult<TrajectoryResponse> {
    let points = blocking(svc, {
        let id = id.clone();
        move |s| s.trajectory(&id)
    })
    .await?;
    Ok(Json(TrajectoryResponse { session_id: id, points }))
}

async fn models(State(svc): State<Arc<Service>>) -> Json<Vec<ModelSummary>> {
    Json(svc.models())
}

async fn answers(
    State(svc): State<Arc<Service>>,
    query: Result<Query<AnswersQuery>, QueryRejection>,
) -> ApiResult<Vec<AnswerLabel>> {
    let Query(q) = query?;
    let limit = q.limit.unwrap_or(ANSWER_PAGE);
    Ok(Json(svc.answers(&q.prefix, q.model.as_deref(), limit)?))
}

async fn not_found() -> (StatusCode, Json<ErrorBody>) {
    let body = ErrorBody {
        error_code: "not_found".into(),
        message: "no such route".into(),
    };
    (StatusCode::NOT_FOUND, Json(body))
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/api/sessions", post(create_session).get(list_sessions))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/draft", post(draft))
        .route("/api/sessions/{id}/submit", post(submit))
        .route("/api/sessions/{id}/abandon", post(abandon))
        .route("/api/sessions/{id}/trajectory", get(trajectory))
        .route("/api/models", get(models))
        .route("/api/answers", get(answers))
        .fallback(not_found)
        .with_state(service)
}

/// Serves until `shutdown` resolves. Every log append is synced before its
/// response is sent, so nothing is left to flush afterwards.
pub async fn serve(
    listener: tokio::net::TcpListener,
    service: Arc<Service>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    if let Ok(addr) = listener.local_addr() {
        log::info!("authoring service listening on http://{addr}");
    }
    axum::serve(listener, router(service)).with_graceful_shutdown(shutdown).await
}
