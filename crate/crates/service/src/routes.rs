use std::time::Duration;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post, put};
use axum::{Json, Router};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

use rspscrn_core::api::{
    Ack, CategoryInfo, CreatedSession, Metadata, SessionState, SessionView, UploadReport, API_PREFIX,
};
use rspscrn_core::dsp::decode_wav;
use rspscrn_core::fusion::ScreenResult;
use rspscrn_core::pipeline::PipelineError;
use rspscrn_core::symptoms::SymptomRecord;
use rspscrn_core::SoundCategory;

use crate::error::ApiError;
use crate::store::{valid_id, SessionHandle};
use crate::AppState;

type ApiResult<T> = Result<Json<T>, ApiError>;

pub fn router(state: AppState) -> Router {
    let upload_limit = DefaultBodyLimit::max(state.config.max_upload_bytes);
    let api = Router::new()
        .route("/health", get(health))
        .route("/categories", get(categories))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/metadata", put(put_metadata))
        .route("/sessions/{id}/symptoms", put(put_symptoms))
        .route("/sessions/{id}/audio/{category}", put(put_audio).layer(upload_limit))
        .route("/sessions/{id}/score", post(score));
    let mut app = Router::new().nest(API_PREFIX, api);
    app = match &state.config.static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(no_route),
    };
    if state.config.cors_any_origin {
        app = app.layer(CorsLayer::permissive());
    }
    app.with_state(state)
}

async fn no_route(uri: axum::http::Uri) -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "NotFound", format!("no route for {}", uri.path()))
}

async fn health() -> Json<Ack> {
    Json(Ack { ok: true })
}

async fn categories(State(st): State<AppState>) -> Json<Vec<CategoryInfo>> {
    let models = st.screener.models();
    Json(
        SoundCategory::ALL
            .iter()
            .map(|&c| CategoryInfo {
                category: c,
                instructions: c.instructions().to_string(),
                model_loaded: models.contains_key(&c),
            })
            .collect(),
    )
}

fn lookup(st: &AppState, id: &str) -> Result<SessionHandle, ApiError> {
    if !valid_id(id) {
        return Err(ApiError::unknown_session(id));
    }
    st.store.get(id).ok_or_else(|| ApiError::unknown_session(id))
}

/// Expires the session on the spot if its TTL ran out since the last sweep.
fn refresh(st: &AppState, session: &mut SessionView) -> Result<(), ApiError> {
    let ttl = chrono::Duration::seconds(st.config.session_ttl_secs as i64);
    if session.state != SessionState::Expired && st.clock.now() - session.created_at > ttl {
        let mut next = session.clone();
        next.state = SessionState::Expired;
        st.store.persist(&next)?;
        *session = next;
        let dir = st.store.dir().join(&session.id);
        if let Err(e) = std::fs::remove_dir_all(&dir) {
            if e.kind() != std::io::ErrorKind::NotFound {
                tracing::warn!(error = %e, "could not delete expired recordings");
            }
        }
    }
    Ok(())
}

fn require_collecting(session: &SessionView) -> Result<(), ApiError> {
    match session.state {
        SessionState::Collecting => Ok(()),
        SessionState::Scored => Err(ApiError::session_closed(&session.id, "already scored")),
        SessionState::Expired => Err(ApiError::session_closed(&session.id, "expired")),
    }
}

fn body_bytes(body: Result<Bytes, BytesRejection>) -> Result<Bytes, ApiError> {
    body.map_err(|r| {
        if r.status() == StatusCode::PAYLOAD_TOO_LARGE {
            ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, "PayloadTooLarge", r.body_text())
        } else {
            ApiError::new(StatusCode::BAD_REQUEST, "BadBody", r.body_text())
        }
    })
}

fn json_body(body: Result<Bytes, BytesRejection>) -> Result<serde_json::Value, ApiError> {
    let bytes = body_bytes(body)?;
    serde_json::from_slice(&bytes).map_err(|e| ApiError::schema(format!("body is not JSON: {e}")))
}

/// Applies `edit` to a copy of the session, persists it, then commits it.
async fn update<T>(
    st: &AppState,
    id: &str,
    edit: impl FnOnce(&mut SessionView) -> Result<T, ApiError>,
) -> Result<T, ApiError> {
    let handle = lookup(st, id)?;
    let mut session = handle.lock().await;
    refresh(st, &mut session)?;
    require_collecting(&session)?;
    let mut next = session.clone();
    let out = edit(&mut next)?;
    st.store.persist(&next)?;
    *session = next;
    Ok(out)
}

async fn create_session(State(st): State<AppState>) -> Result<(StatusCode, Json<CreatedSession>), ApiError> {
    let session = st.store.create(st.clock.now())?;
    Ok((StatusCode::CREATED, Json(CreatedSession { id: session.id })))
}

async fn get_session(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<SessionView> {
    let handle = lookup(&st, &id)?;
    let mut session = handle.lock().await;
    refresh(&st, &mut session)?;
    Ok(Json(session.clone()))
}

async fn put_metadata(
    State(st): State<AppState>,
    Path(id): Path<String>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<Ack> {
    let value = json_body(body)?;
    let metadata: Metadata = serde_json::from_value(value).map_err(|e| ApiError::schema(e.to_string()))?;
    update(&st, &id, |s| {
        s.metadata = Some(metadata);
        Ok(())
    })
    .await?;
    Ok(Json(Ack { ok: true }))
}

async fn put_symptoms(
    State(st): State<AppState>,
    Path(id): Path<String>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<Ack> {
    let value = json_body(body)?;
    let record = SymptomRecord::from_json(&value).map_err(|e| ApiError::schema(e.to_string()))?;
    update(&st, &id, |s| {
        s.symptoms = Some(record);
        Ok(())
    })
    .await?;
    Ok(Json(Ack { ok: true }))
}

async fn put_audio(
    State(st): State<AppState>,
    Path((id, category)): Path<(String, String)>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<UploadReport> {
    let category: SoundCategory = category
        .parse()
        .map_err(|e: rspscrn_core::category::UnknownCategory| {
            ApiError::new(StatusCode::BAD_REQUEST, "UnknownCategory", e.to_string())
        })?;
    let bytes = body_bytes(body)?;
    let report = update(&st, &id, |s| {
        let admitted = st.screener.front_end().admit_wav(&bytes)?;
        let report = UploadReport {
            category,
            duration_s: admitted.clip.duration_s(),
            rms: admitted.rms,
            sample_rate: admitted.clip.sample_rate(),
            bytes: bytes.len(),
        };
        st.store.write_audio(&s.id, category, &bytes)?;
        s.recordings.insert(category, report.clone());
        Ok(report)
    })
    .await?;
    Ok(Json(report))
}

async fn score(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<ScreenResult> {
    let handle = lookup(&st, &id)?;
    let mut session = handle.lock().await;
    refresh(&st, &mut session)?;
    match session.state {
        SessionState::Scored => {
            if let Some(result) = &session.result {
                return Ok(Json(result.clone()));
            }
        }
        SessionState::Expired => return Err(ApiError::session_closed(&id, "expired")),
        SessionState::Collecting => {}
    }
    if session.symptoms.is_none() && session.recordings.is_empty() {
        return Err(PipelineError::NothingToScore.into());
    }

    let job = {
        let st = st.clone();
        let id = id.clone();
        let symptoms = session.symptoms;
        let categories: Vec<SoundCategory> = session.recordings.keys().copied().collect();
        let at = st.clock.now();
        tokio::task::spawn_blocking(move || -> Result<ScreenResult, ApiError> {
            let mut clips = Vec::with_capacity(categories.len());
            for c in categories {
                let bytes = st.store.read_audio(&id, c)?;
                clips.push((c, decode_wav(&bytes)?));
            }
            Ok(st.screener.screen(symptoms.as_ref(), &clips, at)?)
        })
    };
    let deadline = Duration::from_secs(st.config.score_deadline_secs);
    let result = match tokio::time::timeout(deadline, job).await {
        Err(_) => {
            return Err(ApiError::new(
                StatusCode::GATEWAY_TIMEOUT,
                "DeadlineExceeded",
                format!("scoring took longer than {deadline:?}"),
            ))
        }
        Ok(Err(join)) => return Err(ApiError::internal(format!("scoring task failed: {join}"))),
        Ok(Ok(r)) => r?,
    };

    let mut next = session.clone();
    next.state = SessionState::Scored;
    next.result = Some(result.clone());
    st.store.persist(&next)?;
    *session = next;
    Ok(Json(result))
}
