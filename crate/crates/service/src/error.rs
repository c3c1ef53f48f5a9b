use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use shadeway_core::ingest::IngestError;
use shadeway_core::pipeline::PipelineError;
use shadeway_core::routing::RoutingError;
use shadeway_core::shadowcast::ShadowError;
use thiserror::Error;

/// Request failures, each mapped to one HTTP status.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ServiceError {
    #[error("{0}")]
    NotFound(String),
    #[error("{message}")]
    BadRequest { message: String, offset: Option<usize> },
    #[error("sun below the horizon (elevation {elevation_deg:.2}°)")]
    Night { elevation_deg: f64 },
    #[error("the scene has no road graph")]
    NoGraph,
    #[error("{0}")]
    Unroutable(String),
    #[error("{0}")]
    Internal(String),
}

impl ServiceError {
    pub fn bad(message: impl Into<String>) -> Self {
        Self::BadRequest {
            message: message.into(),
            offset: None,
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            Self::NotFound(_) => StatusCode::NOT_FOUND,
            Self::BadRequest { .. } => StatusCode::BAD_REQUEST,
            Self::Night { .. } | Self::Unroutable(_) => StatusCode::UNPROCESSABLE_ENTITY,
            Self::NoGraph => StatusCode::CONFLICT,
            Self::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.to_string() });
        match &self {
            Self::BadRequest { offset: Some(o), .. } => body["offset"] = json!(o),
            Self::Night { elevation_deg } => body["elevation_deg"] = json!(elevation_deg),
            _ => {}
        }
        (self.status(), Json(body)).into_response()
    }
}

impl From<IngestError> for ServiceError {
    fn from(e: IngestError) -> Self {
        let offset = match &e {
            IngestError::Json { offset, .. } => Some(*offset),
            _ => None,
        };
        Self::BadRequest {
            message: e.to_string(),
            offset,
        }
    }
}

impl From<RoutingError> for ServiceError {
    fn from(e: RoutingError) -> Self {
        match e {
            RoutingError::NoGraph => Self::NoGraph,
            RoutingError::InvalidWeight(_) => Self::bad(e.to_string()),
            RoutingError::NoRoute { .. } | RoutingError::Snap { .. } => Self::Unroutable(e.to_string()),
            other => Self::Internal(other.to_string()),
        }
    }
}

impl From<PipelineError> for ServiceError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Shadow(ShadowError::NightTime { elevation_deg }) => Self::Night { elevation_deg },
            PipelineError::Routing(r) => r.into(),
            PipelineError::Ingest(i) => i.into(),
            PipelineError::Solar(s) => Self::bad(s.to_string()),
            PipelineError::Invalid(m) => Self::bad(m),
            other => Self::Internal(other.to_string()),
        }
    }
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        Self::Internal(format!("io: {e}"))
    }
}

impl From<serde_json::Error> for ServiceError {
    fn from(e: serde_json::Error) -> Self {
        Self::Internal(format!("json: {e}"))
    }
}
