use argwf_core::format::{blockers_to_value, FormatError};
use argwf_core::{Error, ProblemInstance};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use serde_json::{json, Value};

use crate::reply;

/// An error response: status plus a JSON body with `error`, `message` and
/// kind-specific fields.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: Value,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: json!({"error": error, "message": message.into()}),
        }
    }

    pub fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not-found", format!("no problem with id {id:?}"))
    }

    pub fn stale(sent: u64, current: u64) -> Self {
        let mut e = Self::new(
            StatusCode::CONFLICT,
            "stale-revision",
            format!("revision {sent} is stale; current revision is {current}"),
        );
        e.body["revision"] = json!(current);
        e
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "input", message)
    }

    pub fn format(e: FormatError) -> Self {
        let mut out = Self::new(StatusCode::UNPROCESSABLE_ENTITY, "schema", e.to_string());
        out.body["diagnostics"] = e
            .diagnostics
            .iter()
            .map(|d| json!({"path": d.path, "message": d.message}))
            .collect();
        out
    }

    pub fn engine(inst: &ProblemInstance, e: Error) -> Self {
        match e {
            Error::Input(msg) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "input", msg),
            Error::Infeasible(ref blockers) => {
                let mut out = Self::new(StatusCode::UNPROCESSABLE_ENTITY, "infeasible", e.to_string());
                out.body["blockers"] = blockers_to_value(inst, blockers);
                out
            }
            Error::BoundExceeded { size, limit } => {
                let mut out = Self::new(StatusCode::UNPROCESSABLE_ENTITY, "bound-exceeded", e.to_string());
                out.body["size"] = json!(size.to_string());
                out.body["limit"] = json!(limit.to_string());
                out
            }
            Error::Conflict(msg) => Self::new(StatusCode::CONFLICT, "stale-move", msg),
            Error::Cancelled => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "timeout", e.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        reply(self.status, None, &self.body)
    }
}
