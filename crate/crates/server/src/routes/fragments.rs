use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use belnet_core::ResourceId;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::envelope::{ok, ApiError, ApiResult};
use crate::extract::{parse_id, Caller, QueryPairs};
use crate::views::{self, LIST_PARAMS};
use crate::AppState;

/// Every fragment the API publishes.
pub const FRAGMENTS: &[&str] = &["resource-list", "resource-detail", "glossary-panel", "labwork-panel"];

pub fn etag_of(payload: &Value) -> String {
    let bytes = serde_json::to_vec(payload).expect("payload serializes");
    format!("\"{}\"", hex::encode(Sha256::digest(bytes)))
}

fn matches_etag(headers: &HeaderMap, etag: &str) -> bool {
    headers
        .get_all(header::IF_NONE_MATCH)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .flat_map(|v| v.split(','))
        .map(|t| t.trim().trim_start_matches("W/"))
        .any(|t| t == "*" || t == etag)
}

fn required_id(q: &QueryPairs) -> Result<ResourceId, ApiError> {
    q.check(&["id"])?;
    let raw = q.get("id").ok_or_else(|| ApiError::bad_request("malformed_query", "missing id parameter"))?;
    parse_id(raw, "resource")
}

pub async fn get(
    State(s): State<AppState>,
    caller: Caller,
    Path(fragment_id): Path<String>,
    q: QueryPairs,
    headers: HeaderMap,
) -> ApiResult<Response> {
    let actor = caller.actor;
    let (name, payload) = match fragment_id.as_str() {
        "resource-list" => {
            q.check(LIST_PARAMS)?;
            let query = views::list_query(&q)?;
            ("resource-list", s.run(move |p| views::list_fragment(p, &query, &actor)).await?)
        }
        "resource-detail" => {
            let id = required_id(&q)?;
            ("resource-detail", s.run(move |p| views::detail_fragment(p, id, &actor)).await?)
        }
        "glossary-panel" => {
            q.check(&["prefix"])?;
            let prefix = q.get("prefix").unwrap_or("").to_owned();
            ("glossary-panel", s.run(move |p| views::glossary_fragment(p, &prefix)).await?)
        }
        "labwork-panel" => {
            let id = required_id(&q)?;
            ("labwork-panel", s.run(move |p| views::labwork_fragment(p, id, &actor)).await?)
        }
        _ => return Err(ApiError::new(StatusCode::NOT_FOUND, "unknown_fragment", "no such fragment")),
    };

    let etag = etag_of(&payload);
    let etag_header = HeaderValue::from_str(&etag).expect("hex etag");
    if matches_etag(&headers, &etag) {
        let mut resp = StatusCode::NOT_MODIFIED.into_response();
        resp.headers_mut().insert(header::ETAG, etag_header);
        return Ok(resp);
    }
    let mut resp = ok(json!({ "fragment_id": name, "etag": etag, "payload": payload })).into_response();
    let h = resp.headers_mut();
    h.insert(header::ETAG, etag_header);
    h.insert(header::CACHE_CONTROL, HeaderValue::from_static("no-cache"));
    Ok(resp)
}
