use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use screening_core::{CnpError, StoreError};

/// Error body carried by every non-2xx response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl ApiError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: "validation",
            message: message.into(),
            field: Some(field.into()),
        }
    }

    pub fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::NOT_FOUND,
            code,
            message: message.into(),
            field: None,
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code: "storage",
            message: message.into(),
            field: None,
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let field = e.field().map(str::to_string);
        let (status, code) = match &e {
            StoreError::UnknownSubject(_) => (StatusCode::NOT_FOUND, "unknown_subject"),
            StoreError::Consistency { .. } => (StatusCode::CONFLICT, "cnp_conflict"),
            StoreError::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "storage"),
            StoreError::Parse { .. } | StoreError::Mismatch { .. } => {
                (StatusCode::BAD_REQUEST, "invalid_record")
            }
            StoreError::Domain(_) | StoreError::Cnp(_) | StoreError::BeforeBirth { .. } => {
                (StatusCode::BAD_REQUEST, "validation")
            }
        };
        ApiError {
            status,
            code,
            message: e.to_string(),
            field,
        }
    }
}

impl From<CnpError> for ApiError {
    fn from(e: CnpError) -> Self {
        ApiError::validation("cnp", e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}
