use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use glyphforge_core::{CodeError, FacetError, SignError, StatsError};
use serde_json::json;

/// An HTTP error rendered as `{error, detail}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub error: &'static str,
    pub detail: String,
}

impl ApiError {
    pub fn new(status: StatusCode, error: &'static str, detail: impl Into<String>) -> ApiError {
        ApiError {
            status,
            error,
            detail: detail.into(),
        }
    }

    pub fn bad_request(error: &'static str, detail: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, error, detail)
    }

    pub fn not_found(detail: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "NotFound", detail)
    }

    pub fn internal(detail: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", detail)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            tracing::error!(error = self.error, detail = %self.detail, "request failed");
        }
        (self.status, Json(json!({ "error": self.error, "detail": self.detail }))).into_response()
    }
}

impl From<FacetError> for ApiError {
    fn from(e: FacetError) -> ApiError {
        let code = match &e {
            FacetError::UnknownArea(_) => "UnknownArea",
            FacetError::UnknownBox { .. } => "UnknownBox",
            FacetError::UnknownOption { .. } => "UnknownOption",
            FacetError::SchemaMismatch { .. } | FacetError::InvalidSchema(_) => {
                return ApiError::internal(e.to_string())
            }
        };
        ApiError::bad_request(code, e.to_string())
    }
}

impl From<CodeError> for ApiError {
    fn from(e: CodeError) -> ApiError {
        let code = match &e {
            CodeError::MalformedCode { .. } => "MalformedCode",
            CodeError::ZeroField { .. } => "ZeroField",
            CodeError::OutOfRange { .. } => "OutOfRange",
        };
        ApiError::bad_request(code, e.to_string())
    }
}

impl From<SignError> for ApiError {
    fn from(e: SignError) -> ApiError {
        let code = match &e {
            SignError::InvariantViolation(_) => "InvariantViolation",
            _ => "ParseError",
        };
        ApiError::bad_request(code, e.to_string())
    }
}

impl From<StatsError> for ApiError {
    fn from(e: StatsError) -> ApiError {
        match e {
            StatsError::EmptyPattern => ApiError::bad_request("EmptyPattern", e.to_string()),
            other => ApiError::internal(other.to_string()),
        }
    }
}
