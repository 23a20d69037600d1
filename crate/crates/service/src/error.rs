use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;

use rspscrn_core::api::ErrorBody;
use rspscrn_core::dsp::DspError;
use rspscrn_core::pipeline::PipelineError;

use crate::store::StoreError;

/// A failed request: HTTP status plus the `{error_code, message}` body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn unknown_session(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "UnknownSession", format!("no session `{id}`"))
    }

    pub fn session_closed(id: &str, state: &str) -> Self {
        ApiError::new(
            StatusCode::CONFLICT,
            "SessionClosed",
            format!("session `{id}` is {state} and accepts no more input"),
        )
    }

    pub fn schema(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "SchemaViolation", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", message)
    }
}

fn status_for(code: &str) -> StatusCode {
    match code {
        "ModelMissing" => StatusCode::CONFLICT,
        "Io" => StatusCode::SERVICE_UNAVAILABLE,
        "DegenerateBand" | "InvalidConfig" | "RateMismatch" | "DimensionMismatch" | "NonFiniteWeight" => {
            StatusCode::INTERNAL_SERVER_ERROR
        }
        _ => StatusCode::BAD_REQUEST,
    }
}

impl From<DspError> for ApiError {
    fn from(e: DspError) -> Self {
        let code = e.code();
        ApiError::new(status_for(code), code, e.to_string())
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let code = e.code();
        ApiError::new(status_for(code), code, e.to_string())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "StorageUnavailable", e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error_code: self.code.to_string(),
            message: self.message,
        };
        (self.status, Json(body)).into_response()
    }
}
