use axum::response::{IntoResponse, Response};
use belnet_markup::Target;
use serde::Deserialize;
use serde_json::json;

use crate::envelope::{ok, ApiError, ApiResult};
use crate::extract::JsonBody;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Source {
    source: String,
}

/// Preview rendering for editors; the same code path stored bodies use.
pub async fn render(JsonBody(s): JsonBody<Source>) -> ApiResult<Response> {
    let doc = belnet_markup::parse(&s.source).map_err(ApiError::from)?;
    Ok(ok(json!({
        "html": doc.render(Target::HtmlMathml),
        "plain_text": doc.render(Target::PlainText),
    }))
    .into_response())
}
