use axum::extract::{Path, State};
use axum::response::{IntoResponse, Response};
use belnet_core::GlossaryEntry;
use serde::Deserialize;

use crate::envelope::{ok, ApiResult};
use crate::extract::{Caller, JsonBody, QueryPairs};
use crate::views;
use crate::AppState;

pub async fn search(State(s): State<AppState>, q: QueryPairs) -> ApiResult<Response> {
    q.check(&["prefix"])?;
    let prefix = q.get("prefix").unwrap_or("").to_owned();
    let data = s.run(move |p| views::glossary_full(p, &prefix)).await?;
    Ok(ok(data).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermBody {
    definition: String,
    #[serde(default)]
    application_area: String,
    #[serde(default)]
    deviation_notes: String,
    #[serde(default)]
    source_refs: Vec<String>,
}

pub async fn upsert(
    State(s): State<AppState>,
    caller: Caller,
    Path(term): Path<String>,
    JsonBody(b): JsonBody<TermBody>,
) -> ApiResult<Response> {
    let entry = GlossaryEntry {
        term,
        definition: b.definition,
        application_area: b.application_area,
        deviation_notes: b.deviation_notes,
        source_refs: b.source_refs,
    };
    let e = s.run(move |p| p.upsert_glossary_term(entry, &caller.actor)).await?;
    Ok(ok(views::glossary_entry(&e)).into_response())
}
