//! Response envelope. Success: `{"status":"ok","data":...}`. Failure:
//! `{"status":"error","code":...,"message":...}` plus `position` for markup
//! errors and `line` for lab file errors.
//!
//! Every JSON body escapes `<`, `>` and `&` so that no request text can
//! turn into live markup wherever a client happens to insert it.

use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use belnet_core::{DenyReason, PortalError};
use belnet_labkit::LabError;
use belnet_markup::ParseError;
use belnet_store::StoreError;
use serde::Serialize;
use serde_json::{json, Value};

/// Serializes to JSON with HTML-significant characters escaped.
pub fn safe_json<T: Serialize>(value: &T) -> String {
    let raw = serde_json::to_string(value).expect("response values always serialize");
    // These characters can only occur inside JSON strings, where the
    // \u escapes mean the same thing.
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        match c {
            '<' => out.push_str("\\u003c"),
            '>' => out.push_str("\\u003e"),
            '&' => out.push_str("\\u0026"),
            _ => out.push(c),
        }
    }
    out
}

pub fn json_response(status: StatusCode, body: &Value) -> Response {
    let mut resp = (status, safe_json(body)).into_response();
    let h = resp.headers_mut();
    h.insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json; charset=utf-8"));
    h.insert(header::X_CONTENT_TYPE_OPTIONS, HeaderValue::from_static("nosniff"));
    h.insert(header::CACHE_CONTROL, HeaderValue::from_static("no-store"));
    resp
}

pub struct Reply<T>(pub StatusCode, pub T);

pub fn ok<T: Serialize>(data: T) -> Reply<T> {
    Reply(StatusCode::OK, data)
}

pub fn created<T: Serialize>(data: T) -> Reply<T> {
    Reply(StatusCode::CREATED, data)
}

impl<T: Serialize> IntoResponse for Reply<T> {
    fn into_response(self) -> Response {
        json_response(self.0, &json!({ "status": "ok", "data": self.1 }))
    }
}

#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub extra: Option<(&'static str, Value)>,
}

pub type ApiResult<T> = Result<T, ApiError>;

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into(), extra: None }
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn internal() -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal_error", "internal error")
    }

    fn with(mut self, key: &'static str, value: Value) -> Self {
        self.extra = Some((key, value));
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "status": "error", "code": self.code, "message": self.message });
        if let Some((k, v)) = self.extra {
            body[k] = v;
        }
        let mut resp = json_response(self.status, &body);
        if self.status == StatusCode::UNAUTHORIZED {
            resp.headers_mut().insert(header::WWW_AUTHENTICATE, HeaderValue::from_static("Bearer"));
        }
        resp
    }
}

impl From<ParseError> for ApiError {
    fn from(e: ParseError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "markup_error", e.to_string()).with(
            "position",
            json!({
                "line": e.position.line,
                "column": e.position.column,
                "expected": e.expected,
                "found": e.found,
            }),
        )
    }
}

impl From<LabError> for ApiError {
    fn from(e: LabError) -> Self {
        let line = e.line();
        let err = ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), e.to_string());
        match line {
            Some(l) => err.with("line", json!(l)),
            None => err,
        }
    }
}

impl From<PortalError> for ApiError {
    fn from(e: PortalError) -> Self {
        use StatusCode as S;
        let status = match &e {
            PortalError::AuthorizationDenied(r) if r.is_insufficient_role() => S::UNAUTHORIZED,
            PortalError::AuthorizationDenied(_) => S::FORBIDDEN,
            PortalError::NotFound(_) => S::NOT_FOUND,
            PortalError::RevisionConflict { .. } => S::CONFLICT,
            PortalError::Markup(p) => return p.clone().into(),
            PortalError::UnknownTaxonomyNode(_) | PortalError::EmptyTerm => S::UNPROCESSABLE_ENTITY,
            PortalError::PayloadTooLarge { .. } => S::PAYLOAD_TOO_LARGE,
            PortalError::UnknownKind(_)
            | PortalError::InvalidQuery(_)
            | PortalError::InvalidInput(_)
            | PortalError::InvalidBundle(_) => S::BAD_REQUEST,
            PortalError::DuplicateSiblingLabel(_)
            | PortalError::CycleRejected
            | PortalError::DuplicateUsername(_)
            | PortalError::BundleConflict(_) => S::CONFLICT,
            PortalError::InvalidCredentials => S::UNAUTHORIZED,
            PortalError::AccountInactive => S::FORBIDDEN,
            PortalError::Store(StoreError::HashMismatch(_)) => {
                tracing::error!(error = %e, "blob failed verification");
                return ApiError::new(S::INTERNAL_SERVER_ERROR, "integrity_error", "stored data failed verification");
            }
            PortalError::Store(_) => {
                tracing::error!(error = %e, "storage failure");
                return ApiError::internal();
            }
        };
        let err = ApiError::new(status, e.code(), e.to_string());
        match e {
            PortalError::AuthorizationDenied(r) => err.with("reason", json!(r.code())),
            PortalError::RevisionConflict { current, .. } => err.with("current_revision", json!(current)),
            _ => err,
        }
    }
}

/// Status an API call gets when `authorize` says no for `reason`.
pub fn denial_status(reason: DenyReason) -> StatusCode {
    if reason.is_insufficient_role() {
        StatusCode::UNAUTHORIZED
    } else {
        StatusCode::FORBIDDEN
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_markup_characters() {
        let s = safe_json(&json!({ "m": "<script>alert('x')</script> & \"q\"" }));
        assert!(!s.contains('<') && !s.contains('>') && !s.contains('&'));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["m"], "<script>alert('x')</script> & \"q\"");
    }

    #[test]
    fn status_mapping() {
        let e: ApiError = PortalError::AuthorizationDenied(DenyReason::NotAnEditor).into();
        assert_eq!(e.status, StatusCode::UNAUTHORIZED);
        let e: ApiError = PortalError::AuthorizationDenied(DenyReason::TierAboveClearance).into();
        assert_eq!(e.status, StatusCode::FORBIDDEN);
        let e: ApiError = PortalError::RevisionConflict { expected: 0, current: 3 }.into();
        assert_eq!(e.status, StatusCode::CONFLICT);
        let e: ApiError = PortalError::Markup(belnet_markup::parse("$x^{2$").unwrap_err()).into();
        assert_eq!(e.status, StatusCode::UNPROCESSABLE_ENTITY);
        assert_eq!(e.extra.unwrap().1["line"], 1);
    }
}
