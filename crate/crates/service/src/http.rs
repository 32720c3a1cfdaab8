//! HTTP + JSON front of [`Lectern`].

use std::convert::Infallible;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{Stream, StreamExt};
use lectern::{serial, CrowdError, ErrorCode, MergeError, QueryError};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::ServiceError;
use crate::service::{Lectern, Submission};
use crate::session::{ConfigPatch, SessionEvent, Target};

pub struct ApiError(ServiceError);

impl<E: Into<ServiceError>> From<E> for ApiError {
    fn from(e: E) -> Self {
        ApiError(e.into())
    }
}

fn bad_request(e: impl std::fmt::Display) -> ApiError {
    ApiError(ServiceError::BadRequest(e.to_string()))
}

pub fn status_of(error: &ServiceError) -> StatusCode {
    use ServiceError as E;
    match error {
        E::UnknownMap(_) | E::UnknownSession(_) => StatusCode::NOT_FOUND,
        E::Query(QueryError::UnknownSlide(_) | QueryError::UnknownTopic(_) | QueryError::UnknownDeck(_)) => {
            StatusCode::NOT_FOUND
        }
        E::Crowd(CrowdError::UnknownSlide(_)) => StatusCode::NOT_FOUND,
        E::MapExists(_) | E::Merge(MergeError::DeckCollision(_)) => StatusCode::CONFLICT,
        E::SessionNotLive | E::SessionEnded | E::InvalidTransition(_) => StatusCode::CONFLICT,
        E::UnknownParticipant => StatusCode::FORBIDDEN,
        E::OutOfBounds { .. } | E::InvalidMap(_) | E::Query(QueryError::CycleDetected { .. }) => {
            StatusCode::UNPROCESSABLE_ENTITY
        }
        E::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::BAD_REQUEST,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.0.code(), "message": self.0.to_string() });
        if let ServiceError::InvalidMap(violations) = &self.0 {
            body["violations"] = json!(violations);
        }
        (status_of(&self.0), Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MergeRequest {
    a: String,
    b: String,
    #[serde(default)]
    map_id: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    map_id: String,
    #[serde(default)]
    config: ConfigPatch,
}

#[derive(Serialize)]
struct JoinResponse {
    token: String,
}

#[derive(Deserialize)]
struct SlideQuery {
    slide: Option<String>,
}

#[derive(Deserialize)]
struct ReportQuery {
    quorum: Option<usize>,
    threshold: Option<f64>,
}

#[derive(Deserialize)]
struct SupportQuery {
    min_support: Option<usize>,
}

#[derive(Deserialize)]
struct EventsQuery {
    since: Option<u64>,
}

fn json_body<T: serde::de::DeserializeOwned>(body: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    body.map(|Json(v)| v).map_err(|e| bad_request(e.body_text()))
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    q.map(|Query(v)| v).map_err(|e| bad_request(e.body_text()))
}

pub fn router(app: Arc<Lectern>) -> Router {
    Router::new()
        .route("/maps", post(create_map))
        .route("/maps/merge", post(merge_maps))
        .route("/maps/{id}", get(get_map))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/start", post(start))
        .route("/sessions/{id}/advance", post(advance))
        .route("/sessions/{id}/goto/{ordinal}", post(goto))
        .route("/sessions/{id}/end", post(end))
        .route("/sessions/{id}/join", post(join))
        .route("/sessions/{id}/current", get(current))
        .route("/sessions/{id}/annotations", post(annotate))
        .route("/sessions/{id}/assistance", get(assistance))
        .route("/sessions/{id}/report", get(report))
        .route("/sessions/{id}/mindset", get(mindset))
        .route("/sessions/{id}/discussion-topics", get(discussion_topics))
        .route("/sessions/{id}/bookmarks", get(bookmarks))
        .route("/sessions/{id}/events", get(events))
        .with_state(app)
}

async fn create_map(State(app): State<Arc<Lectern>>, body: Bytes) -> ApiResult<impl IntoResponse> {
    Ok((StatusCode::CREATED, Json(app.upload(&body)?)))
}

async fn get_map(State(app): State<Arc<Lectern>>, Path(id): Path<String>) -> ApiResult<Response> {
    let map = app.map(&id)?;
    Ok(([(header::CONTENT_TYPE, "application/json")], serial::to_json(&map)).into_response())
}

async fn merge_maps(
    State(app): State<Arc<Lectern>>,
    body: Result<Json<MergeRequest>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let req = json_body(body)?;
    Ok((StatusCode::CREATED, Json(app.merge_maps(&req.a, &req.b, req.map_id)?)))
}

async fn create_session(
    State(app): State<Arc<Lectern>>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let req = json_body(body)?;
    Ok((StatusCode::CREATED, Json(app.create_session(&req.map_id, req.config)?)))
}

async fn get_session(State(app): State<Arc<Lectern>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(app.session_state(&id).await?))
}

async fn start(State(app): State<Arc<Lectern>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(app.start(&id).await?))
}

async fn advance(State(app): State<Arc<Lectern>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(app.advance(&id, Target::Next).await?))
}

async fn goto(
    State(app): State<Arc<Lectern>>,
    path: Result<Path<(String, u32)>, PathRejection>,
) -> ApiResult<impl IntoResponse> {
    let Path((id, ordinal)) = path.map_err(|e| bad_request(e.body_text()))?;
    Ok(Json(app.advance(&id, Target::Ordinal(ordinal)).await?))
}

async fn end(State(app): State<Arc<Lectern>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(app.end(&id).await?))
}

async fn join(State(app): State<Arc<Lectern>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let token = app.join(&id).await?;
    Ok((StatusCode::CREATED, Json(JoinResponse { token })))
}

async fn current(State(app): State<Arc<Lectern>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(app.current(&id).await?))
}

async fn annotate(
    State(app): State<Arc<Lectern>>,
    Path(id): Path<String>,
    body: Result<Json<Submission>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let submission = json_body(body)?;
    Ok((StatusCode::CREATED, Json(app.submit(&id, submission).await?)))
}

async fn assistance(
    State(app): State<Arc<Lectern>>,
    Path(id): Path<String>,
    q: Result<Query<SlideQuery>, QueryRejection>,
) -> ApiResult<impl IntoResponse> {
    let slide = query(q)?
        .slide
        .ok_or_else(|| bad_request("missing query parameter `slide`"))?;
    Ok(Json(app.assistance(&id, &slide).await?))
}

async fn report(
    State(app): State<Arc<Lectern>>,
    Path(id): Path<String>,
    q: Result<Query<ReportQuery>, QueryRejection>,
) -> ApiResult<impl IntoResponse> {
    let q = query(q)?;
    Ok(Json(app.report(&id, q.quorum, q.threshold).await?))
}

async fn mindset(
    State(app): State<Arc<Lectern>>,
    Path(id): Path<String>,
    q: Result<Query<SlideQuery>, QueryRejection>,
) -> ApiResult<impl IntoResponse> {
    let q = query(q)?;
    Ok(Json(app.mindset(&id, q.slide.as_deref()).await?))
}

async fn discussion_topics(
    State(app): State<Arc<Lectern>>,
    Path(id): Path<String>,
    q: Result<Query<SupportQuery>, QueryRejection>,
) -> ApiResult<impl IntoResponse> {
    let q = query(q)?;
    Ok(Json(app.discussion_topics(&id, q.min_support).await?))
}

async fn bookmarks(State(app): State<Arc<Lectern>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(app.bookmarks(&id).await?))
}

fn sse_event(event: &SessionEvent) -> Event {
    let data = serde_json::to_value(event).expect("events serialize");
    let name = data["type"].as_str().unwrap_or("EVENT").to_string();
    Event::default()
        .id(event.seq.to_string())
        .event(name)
        .data(data.to_string())
}

/// Server-sent events. Resume with `?since=N` or a `Last-Event-ID` header.
async fn events(
    State(app): State<Arc<Lectern>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    q: Result<Query<EventsQuery>, QueryRejection>,
) -> ApiResult<Sse<impl Stream<Item = Result<Event, Infallible>>>> {
    let last_event_id = headers
        .get("last-event-id")
        .map(|v| {
            v.to_str()
                .ok()
                .and_then(|s| s.trim().parse::<u64>().ok())
                .ok_or_else(|| bad_request("Last-Event-ID must be an event sequence number"))
        })
        .transpose()?;
    let since = query(q)?.since.or(last_event_id).unwrap_or(0);
    let stream = app.subscribe(&id, since).await?;
    Ok(Sse::new(stream.map(|e| Ok(sse_event(&e)))).keep_alive(KeepAlive::default()))
}
