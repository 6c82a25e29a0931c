use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use grasp_core::{CatalogError, EngineError, RasterError};
use serde_json::json;

/// Error payload `{"error": code, "message": ..., "field": ...}` with an HTTP status.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    pub field: Option<String>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: impl Into<String>, message: impl Into<String>) -> Self {
        Self { status, code: code.into(), message: message.into(), field: None }
    }

    /// 422 naming the offending request field.
    pub fn invalid(field: &str, message: impl Into<String>) -> Self {
        Self { field: Some(field.to_owned()), ..Self::new(StatusCode::UNPROCESSABLE_ENTITY, "InvalidSpec", message) }
    }

    pub fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn unavailable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::SERVICE_UNAVAILABLE, "CatalogUnavailable", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", message)
    }
}

impl From<RasterError> for ApiError {
    fn from(e: RasterError) -> Self {
        let status = match e {
            RasterError::DegeneratePolygon(_)
            | RasterError::UnsupportedExtent(_)
            | RasterError::InvalidBoundingBox(_)
            | RasterError::OutOfRange(_)
            | RasterError::EmptyIntersection => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.code(), e.to_string())
    }
}

impl From<CatalogError> for ApiError {
    fn from(e: CatalogError) -> Self {
        let status = match e {
            CatalogError::UnknownScene(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.code(), e.to_string())
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Raster(r) => r.into(),
            EngineError::Catalog(c) => c.into(),
            other => {
                let status = match other {
                    EngineError::DegenerateSamples { .. } | EngineError::CalibrationInconsistent { .. } => {
                        StatusCode::CONFLICT
                    }
                    EngineError::NoScenesInWindow { .. } => StatusCode::NOT_FOUND,
                    EngineError::EmptyPolygonFootprint => StatusCode::UNPROCESSABLE_ENTITY,
                    _ => StatusCode::INTERNAL_SERVER_ERROR,
                };
                Self::new(status, other.code(), other.to_string())
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.code, "message": self.message });
        if let Some(f) = self.field {
            body["field"] = json!(f);
        }
        (self.status, Json(body)).into_response()
    }
}
