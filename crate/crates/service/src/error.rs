use std::fmt;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;

/// Errors surfaced by the service, each with a status and a stable code.
#[derive(Debug)]
pub enum ServiceError {
    Core(navlearn_core::Error),
    NotFound { kind: &'static str, id: String },
    Exists { kind: &'static str, id: String },
    InvalidId(String),
    Busy { model: String },
    MalformedPolyline(String),
    BadRequest(String),
    Internal(String),
}

pub type ServiceResult<T> = std::result::Result<T, ServiceError>;

impl ServiceError {
    pub fn not_found(kind: &'static str, id: impl Into<String>) -> Self {
        ServiceError::NotFound { kind, id: id.into() }
    }

    pub fn status(&self) -> StatusCode {
        use navlearn_core::Error as E;
        match self {
            ServiceError::NotFound { .. } => StatusCode::NOT_FOUND,
            ServiceError::Exists { .. } | ServiceError::Busy { .. } => StatusCode::CONFLICT,
            ServiceError::InvalidId(_) | ServiceError::MalformedPolyline(_) | ServiceError::BadRequest(_) => {
                StatusCode::BAD_REQUEST
            }
            ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
            ServiceError::Core(e) => match e {
                E::SchemaMismatch(_)
                | E::DimensionMismatch { .. }
                | E::GeometryMismatch(_)
                | E::Impassable(_)
                | E::Unreachable { .. }
                | E::InvalidDemonstration(_)
                | E::NoDemonstrations
                | E::NoTrials => StatusCode::UNPROCESSABLE_ENTITY,
                E::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
                _ => StatusCode::BAD_REQUEST,
            },
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Core(e) => e.code(),
            ServiceError::NotFound { .. } => "not_found",
            ServiceError::Exists { .. } => "already_exists",
            ServiceError::InvalidId(_) => "invalid_id",
            ServiceError::Busy { .. } => "model_busy",
            ServiceError::MalformedPolyline(_) => "malformed_polyline",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::Internal(_) => "internal",
        }
    }
}

impl fmt::Display for ServiceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ServiceError::Core(e) => write!(f, "{e}"),
            ServiceError::NotFound { kind, id } => write!(f, "{kind} `{id}` not found"),
            ServiceError::Exists { kind, id } => write!(f, "{kind} `{id}` already exists"),
            ServiceError::InvalidId(id) => write!(f, "invalid id `{id}`: use 1-64 of [A-Za-z0-9_-]"),
            ServiceError::Busy { model } => write!(f, "model `{model}` already has a training job running"),
            ServiceError::MalformedPolyline(m) => write!(f, "malformed polyline: {m}"),
            ServiceError::BadRequest(m) => f.write_str(m),
            ServiceError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for ServiceError {}

impl From<navlearn_core::Error> for ServiceError {
    fn from(e: navlearn_core::Error) -> Self {
        ServiceError::Core(e)
    }
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        ServiceError::Core(e.into())
    }
}

impl From<serde_json::Error> for ServiceError {
    fn from(e: serde_json::Error) -> Self {
        ServiceError::Core(e.into())
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code(), "message": self.to_string() } });
        (self.status(), Json(body)).into_response()
    }
}
