use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use crate::store::StoreError;

/// Error body returned by every route.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    pub http_status: u16,
}

/// HTTP status for a module error code.
pub fn status_for(code: &str) -> StatusCode {
    match code {
        "UnknownCard" | "UnknownCanvas" | "UnknownCategory" | "UnknownProject" => StatusCode::NOT_FOUND,
        "KindViolation" | "DuplicateCategory" | "OutOfOrder" | "InconsistentEvent" | "ProjectExists"
        | "OverviewPending" => StatusCode::CONFLICT,
        "LlmTimeout" => StatusCode::GATEWAY_TIMEOUT,
        "UnknownTemplate" | "MissingBinding" | "ConfigError" | "IoError" | "CorruptProject" | "Internal" => {
            StatusCode::INTERNAL_SERVER_ERROR
        }
        "TagNotFound" | "UnbalancedTags" | "EmptyTable" | "RaggedRow" | "ParseError" | "CountMismatch"
        | "LlmTransport" | "MissingFixture" => StatusCode::BAD_GATEWAY,
        _ => StatusCode::BAD_REQUEST,
    }
}

impl ApiError {
    pub fn new(code: impl Into<String>, message: impl Into<String>) -> Self {
        let code = code.into();
        let http_status = status_for(&code).as_u16();
        Self {
            code,
            message: message.into(),
            http_status,
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new("Internal", message)
    }

    pub fn status(&self) -> StatusCode {
        StatusCode::from_u16(self.http_status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR)
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for ApiError {}

impl From<flexmind_core::Error> for ApiError {
    fn from(e: flexmind_core::Error) -> Self {
        Self::new(e.code(), e.to_string())
    }
}

macro_rules! from_module_error {
    ($($t:ty),*) => {$(
        impl From<$t> for ApiError {
            fn from(e: $t) -> Self {
                Self::new(e.code(), e.to_string())
            }
        }
    )*};
}

from_module_error!(
    flexmind_core::model::ModelError,
    flexmind_core::llm::LlmError,
    flexmind_core::analytics::AnalyticsError,
    flexmind_core::scoring::ScoringError,
    StoreError
);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status(), Json(self)).into_response()
    }
}
