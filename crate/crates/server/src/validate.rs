//! Request screening that runs before routing: path traversal, body size,
//! upload media types, query encoding and the plain-HTTP redirect.

use axum::extract::{Request, State};
use axum::http::{header, Method, StatusCode};
use axum::middleware::Next;
use axum::response::{IntoResponse, Response};
use percent_encoding::percent_decode_str;

use crate::envelope::ApiError;
use crate::AppState;

/// Extra room on upload routes for multipart framing around the file.
pub const MULTIPART_SLACK: u64 = 64 * 1024;

/// The parts of an incoming request that screening looks at.
#[derive(Debug, Clone, Copy)]
pub struct RawRequest<'a> {
    pub method: &'a Method,
    /// Path exactly as sent, still percent-encoded.
    pub path: &'a str,
    pub query: Option<&'a str>,
    pub host: Option<&'a str>,
    /// Whether the client reached us over TLS.
    pub secure: bool,
    pub content_length: Option<u64>,
    pub content_type: Option<&'a str>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_body_bytes: u64,
    pub max_upload_bytes: u64,
    /// Set when TLS is on; plain requests get redirected to this port.
    pub https_port: Option<u16>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rejection {
    Redirect(String),
    Error { status: StatusCode, code: &'static str, message: &'static str },
}

impl Rejection {
    fn error(status: StatusCode, code: &'static str, message: &'static str) -> Self {
        Rejection::Error { status, code, message }
    }
}

impl IntoResponse for Rejection {
    fn into_response(self) -> Response {
        match self {
            Rejection::Redirect(location) => {
                (StatusCode::PERMANENT_REDIRECT, [(header::LOCATION, location)]).into_response()
            }
            Rejection::Error { status, code, message } => ApiError::new(status, code, message).into_response(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum UploadRoute {
    Attachment,
    Spectrum,
}

fn upload_route(method: &Method, segments: &[String]) -> Option<UploadRoute> {
    if method != Method::POST {
        return None;
    }
    match segments {
        [api, res, _, att] if api == "api" && res == "resources" && att == "attachments" => {
            Some(UploadRoute::Attachment)
        }
        [api, lab, sp] if api == "api" && lab == "labkit" && sp == "spectrum" => Some(UploadRoute::Spectrum),
        _ => None,
    }
}

fn media_type(content_type: Option<&str>) -> String {
    content_type.and_then(|c| c.split(';').next()).map(|m| m.trim().to_ascii_lowercase()).unwrap_or_default()
}

fn valid_host(h: &str) -> bool {
    !h.is_empty() && h.len() <= 255 && h.bytes().all(|b| b.is_ascii_alphanumeric() || b".-:[]".contains(&b))
}

pub fn validate_request(raw: &RawRequest<'_>, limits: &Limits) -> Result<(), Rejection> {
    use StatusCode as S;

    if !raw.path.starts_with('/') {
        return Err(Rejection::error(S::BAD_REQUEST, "malformed_path", "path must be absolute"));
    }
    let mut segments = Vec::new();
    for seg in raw.path[1..].split('/') {
        let decoded = percent_decode_str(seg)
            .decode_utf8()
            .map_err(|_| Rejection::error(S::BAD_REQUEST, "malformed_path", "path is not valid UTF-8"))?;
        if decoded == "." || decoded == ".." {
            return Err(Rejection::error(S::BAD_REQUEST, "path_traversal", "dot segments are not allowed"));
        }
        if decoded.contains(['/', '\\', '\0']) {
            return Err(Rejection::error(S::BAD_REQUEST, "malformed_path", "encoded separators are not allowed"));
        }
        segments.push(decoded.into_owned());
    }
    if let Some(q) = raw.query {
        let bad_escape =
            q.split('%').skip(1).any(|rest| rest.len() < 2 || !rest.as_bytes()[..2].iter().all(u8::is_ascii_hexdigit));
        let bytes: Vec<u8> = percent_decode_str(&q.replace('+', " ")).collect();
        if bad_escape || std::str::from_utf8(&bytes).is_err() {
            return Err(Rejection::error(S::BAD_REQUEST, "malformed_query", "query string is not valid"));
        }
    }

    if let Some(port) = limits.https_port {
        if !raw.secure {
            let host = raw.host.unwrap_or("");
            if !valid_host(host) {
                return Err(Rejection::error(S::BAD_REQUEST, "malformed_host", "missing or invalid Host header"));
            }
            let name = match host.find(']') {
                Some(end) if host.starts_with('[') => &host[..=end],
                _ => host.split(':').next().unwrap_or(host),
            };
            let mut location = format!("https://{name}");
            if port != 443 {
                location.push_str(&format!(":{port}"));
            }
            location.push_str(raw.path);
            if let Some(q) = raw.query {
                location.push('?');
                location.push_str(q);
            }
            return Err(Rejection::Redirect(location));
        }
    }

    let upload = upload_route(raw.method, &segments);
    let limit = match upload {
        Some(_) => limits.max_upload_bytes.saturating_add(MULTIPART_SLACK),
        None => limits.max_body_bytes,
    };
    if raw.content_length.is_some_and(|n| n > limit) {
        return Err(Rejection::error(S::PAYLOAD_TOO_LARGE, "payload_too_large", "request body exceeds the limit"));
    }
    let mt = media_type(raw.content_type);
    match upload {
        Some(UploadRoute::Attachment) if mt != "multipart/form-data" => Err(Rejection::error(
            S::UNSUPPORTED_MEDIA_TYPE,
            "unsupported_media_type",
            "uploads must be multipart/form-data",
        )),
        Some(UploadRoute::Spectrum) if mt != "multipart/form-data" && mt != "application/json" => {
            Err(Rejection::error(
                S::UNSUPPORTED_MEDIA_TYPE,
                "unsupported_media_type",
                "spectra must be multipart/form-data or application/json",
            ))
        }
        _ => Ok(()),
    }
}

/// Screening middleware for the main listener.
pub async fn screen(State(state): State<AppState>, req: Request, next: Next) -> Response {
    let headers = req.headers();
    let text = |name| headers.get(name).and_then(|v| v.to_str().ok());
    // Behind a TLS-terminating proxy the forwarded scheme is what counts.
    let secure = match text("x-forwarded-proto") {
        Some(p) => p.eq_ignore_ascii_case("https"),
        None => state.config.tls_port.is_some(),
    };
    let content_length = match text(header::CONTENT_LENGTH.as_str()) {
        Some(v) => match v.trim().parse::<u64>() {
            Ok(n) => Some(n),
            Err(_) => {
                return ApiError::new(StatusCode::BAD_REQUEST, "malformed_length", "invalid Content-Length")
                    .into_response()
            }
        },
        None => None,
    };
    let raw = RawRequest {
        method: req.method(),
        path: req.uri().path(),
        query: req.uri().query(),
        host: text(header::HOST.as_str()).or_else(|| req.uri().host()),
        secure,
        content_length,
        content_type: text(header::CONTENT_TYPE.as_str()),
    };
    match validate_request(&raw, &state.config.limits()) {
        Ok(()) => next.run(req).await,
        Err(r) => r.into_response(),
    }
}

/// Screening for the plain-HTTP listener that only exists to redirect.
pub async fn redirect_only(State(limits): State<Limits>, req: Request) -> Response {
    let headers = req.headers();
    let raw = RawRequest {
        method: req.method(),
        path: req.uri().path(),
        query: req.uri().query(),
        host: headers.get(header::HOST).and_then(|v| v.to_str().ok()),
        secure: false,
        content_length: None,
        content_type: None,
    };
    match validate_request(&raw, &limits) {
        Ok(()) => ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route").into_response(),
        Err(r) => r.into_response(),
    }
}
