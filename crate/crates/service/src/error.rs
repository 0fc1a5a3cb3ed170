use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use chairsearch_core::dataset::ChairId;
use chairsearch_core::session::SessionError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Session(#[from] SessionError),

    #[error("unknown session {0}")]
    UnknownSession(String),

    #[error("unknown chair {0}")]
    UnknownChair(ChairId),

    #[error("malformed request: {0}")]
    Malformed(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("no such endpoint")]
    NotFound,

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] chairsearch_core::Error),

    #[error(transparent)]
    Sim(#[from] chairsearch_sim::SimError),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl ServiceError {
    /// Stable machine-readable code; session errors keep their engine code.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Session(e) => e.code(),
            ServiceError::UnknownSession(_) => "UNKNOWN_SESSION",
            ServiceError::UnknownChair(_) => "UNKNOWN_CHAIR",
            ServiceError::Malformed(_) => "MALFORMED_REQUEST",
            ServiceError::Invalid(_) => "INVALID_INPUT",
            ServiceError::NotFound => "NOT_FOUND",
            ServiceError::Config(_) => "CONFIG_ERROR",
            ServiceError::Core(_) | ServiceError::Sim(_) | ServiceError::Io(_) | ServiceError::Internal(_) => {
                "INTERNAL_ERROR"
            }
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::Session(e) => match e {
                SessionError::ModeViolation { .. }
                | SessionError::QueryInFlight
                | SessionError::NoPendingSelection
                | SessionError::TimedOut
                | SessionError::NotActive(_) => StatusCode::CONFLICT,
                SessionError::UnknownChair(_) => StatusCode::NOT_FOUND,
                SessionError::RankOutOfRange { .. } | SessionError::Invalid(_) => StatusCode::BAD_REQUEST,
            },
            ServiceError::UnknownSession(_) | ServiceError::UnknownChair(_) | ServiceError::NotFound => {
                StatusCode::NOT_FOUND
            }
            ServiceError::Malformed(_) | ServiceError::Invalid(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

/// Body of every error response: `{"error": {"code", "message"}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: ErrorDetail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorDetail {
    pub code: String,
    pub message: String,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: ErrorDetail {
                code: self.code().into(),
                message: self.to_string(),
            },
        };
        (self.status(), Json(body)).into_response()
    }
}
