//! JSON over HTTP. Errors come back as `{"code": ..., ...}` with the
//! variant name of [`ApiError`] as the code.

use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use rpm_core::{ResponseSet, TimeRange};
use rpm_sync::wire;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::api::{ApiError, AuthReason, BundleResult, BundleStatus, Service};

pub type Shared = Arc<Mutex<Service>>;

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self {
            ApiError::AuthFailure {
                reason: AuthReason::Forbidden,
            } => StatusCode::FORBIDDEN,
            ApiError::AuthFailure { .. } => StatusCode::UNAUTHORIZED,
            ApiError::ValidationFailure { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::DuplicateSubmission { .. } | ApiError::UserExists { .. } => StatusCode::CONFLICT,
            ApiError::UnknownSubject { .. } => StatusCode::NOT_FOUND,
            ApiError::StorageFailure { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let mut body = serde_json::to_value(&self).expect("error serializes");
        body["message"] = json!(self.to_string());
        (status, Json(body)).into_response()
    }
}

fn bearer(headers: &HeaderMap) -> String {
    headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .unwrap_or_default()
        .trim()
        .to_string()
}

#[derive(Debug, Default, Deserialize)]
pub struct RangeQuery {
    pub from: Option<DateTime<Utc>>,
    pub to: Option<DateTime<Utc>>,
    pub data_type: Option<String>,
    pub now: Option<DateTime<Utc>>,
}

impl RangeQuery {
    fn range(&self) -> TimeRange {
        TimeRange {
            from: self.from,
            to: self.to,
        }
    }
}

#[derive(Debug, Deserialize)]
struct LoginRequest {
    user_id: String,
    password: String,
}

#[derive(Debug, Deserialize)]
struct ConsentRequest {
    subject_id: String,
    data_type: String,
    decision: String,
}

#[derive(Debug, Deserialize)]
struct SusRequest {
    items: Vec<i64>,
    tool_label: String,
}

/// One entry per uploaded bundle; `ack` is the hex wire frame of the ack.
#[derive(Debug, Serialize, Deserialize)]
pub struct BundleReply {
    pub id: String,
    #[serde(flatten)]
    pub status: BundleStatus,
    pub ack: Option<String>,
}

impl From<BundleResult> for BundleReply {
    fn from(r: BundleResult) -> Self {
        Self {
            id: r.id.to_string(),
            status: r.status,
            ack: r
                .ack
                .and_then(|b| wire::encode(&b).ok())
                .map(hex::encode),
        }
    }
}

pub fn router(service: Shared) -> Router {
    Router::new()
        .route("/login", post(login))
        .route("/responses", post(submit_response))
        .route("/bundles", post(receive_bundles))
        .route("/subjects/{id}/screenings", get(screenings))
        .route("/subjects/{id}/due", get(due))
        .route("/subjects/{id}/observations", get(observations))
        .route("/consent", post(consent))
        .route("/sus", post(sus))
        .route("/audit", get(audit))
        .with_state(service)
}

async fn login(State(svc): State<Shared>, Json(req): Json<LoginRequest>) -> Result<Response, ApiError> {
    let token = svc.lock().unwrap().login(&req.user_id, &req.password)?;
    Ok(Json(json!({ "token": token })).into_response())
}

async fn submit_response(
    State(svc): State<Shared>,
    headers: HeaderMap,
    Json(resp): Json<ResponseSet>,
) -> Result<Response, ApiError> {
    let id = svc.lock().unwrap().submit_response(&bearer(&headers), resp)?;
    Ok((StatusCode::CREATED, Json(json!({ "id": id }))).into_response())
}

async fn receive_bundles(State(svc): State<Shared>, headers: HeaderMap, body: Bytes) -> Result<Response, ApiError> {
    let token = bearer(&headers);
    let mut svc = svc.lock().unwrap();
    let bundles = match wire::decode_all(&body) {
        Ok(b) => b,
        Err(e) => {
            // Authenticate first so malformed uploads from strangers are
            // reported as auth failures.
            svc.receive_bundles(&token, Vec::new())?;
            return Ok((
                StatusCode::BAD_REQUEST,
                Json(json!({ "code": "MalformedBundle", "message": e.to_string() })),
            )
                .into_response());
        }
    };
    let results: Vec<BundleReply> = svc
        .receive_bundles(&token, bundles)?
        .into_iter()
        .map(BundleReply::from)
        .collect();
    Ok(Json(json!({ "results": results })).into_response())
}

async fn screenings(
    State(svc): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
    Query(q): Query<RangeQuery>,
) -> Result<Response, ApiError> {
    let list = svc.lock().unwrap().get_screenings(&bearer(&headers), &id, q.range())?;
    Ok(Json(list).into_response())
}

async fn due(
    State(svc): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
    Query(q): Query<RangeQuery>,
) -> Result<Response, ApiError> {
    let st = svc.lock().unwrap().get_due(&bearer(&headers), &id, q.now)?;
    Ok(Json(st).into_response())
}

async fn observations(
    State(svc): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
    Query(q): Query<RangeQuery>,
) -> Result<Response, ApiError> {
    let list = svc
        .lock()
        .unwrap()
        .get_observations(&bearer(&headers), &id, q.data_type.as_deref(), q.range())?;
    Ok(Json(list).into_response())
}

async fn consent(
    State(svc): State<Shared>,
    headers: HeaderMap,
    Json(req): Json<ConsentRequest>,
) -> Result<Response, ApiError> {
    let settings =
        svc.lock()
            .unwrap()
            .set_consent(&bearer(&headers), &req.subject_id, &req.data_type, &req.decision)?;
    Ok(Json(settings).into_response())
}

async fn sus(State(svc): State<Shared>, headers: HeaderMap, Json(req): Json<SusRequest>) -> Result<Response, ApiError> {
    let score = svc
        .lock()
        .unwrap()
        .submit_sus(&bearer(&headers), &req.items, &req.tool_label)?;
    Ok((StatusCode::CREATED, Json(json!({ "score": score }))).into_response())
}

async fn audit(State(svc): State<Shared>, headers: HeaderMap, Query(q): Query<RangeQuery>) -> Result<Response, ApiError> {
    let entries = svc.lock().unwrap().read_audit(&bearer(&headers), q.range())?;
    Ok(Json(entries).into_response())
}
