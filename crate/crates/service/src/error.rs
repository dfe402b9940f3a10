use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use bevalkit_core::store::StoreError;
use bevalkit_core::syntax::ParseError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{0} not found")]
    NotFound(String),
    #[error("{field}: {error}")]
    Parse { field: String, error: ParseError },
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Internal(String),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::NotFound(_) => "not_found",
            ServiceError::Parse { .. } => "parse_error",
            ServiceError::BadRequest(_) => "invalid_request",
            ServiceError::Conflict(_) => "conflict",
            ServiceError::Internal(_) => "internal",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Parse { .. } | ServiceError::BadRequest(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ServiceError::Conflict(_) => StatusCode::CONFLICT,
            ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl From<StoreError> for ServiceError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownComponent(name) => ServiceError::NotFound(format!("component '{name}'")),
            StoreError::UnknownPo(name) => ServiceError::NotFound(format!("proof obligation \"{name}\"")),
            other => ServiceError::Internal(other.to_string()),
        }
    }
}

#[derive(Serialize)]
struct ErrorBody {
    code: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    column: Option<usize>,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let (field, line, column) = match &self {
            ServiceError::Parse { field, error } => {
                (Some(field.clone()), Some(error.line()), Some(error.column()))
            }
            _ => (None, None, None),
        };
        let body = ErrorBody {
            code: self.code(),
            message: self.to_string(),
            field,
            line,
            column,
        };
        (self.status(), Json(body)).into_response()
    }
}
