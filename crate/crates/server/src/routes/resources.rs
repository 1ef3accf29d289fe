use std::collections::BTreeSet;

use axum::extract::{Path, State};
use axum::response::{IntoResponse, Response};
use belnet_core::{AccessTier, ResourceDraft, ResourceId, ResourcePatch, TaxonomyNodeId};
use serde::Deserialize;

use crate::envelope::{created, ok, ApiResult};
use crate::extract::{parse_id, Caller, JsonBody, QueryPairs};
use crate::views::{self, LIST_PARAMS};
use crate::AppState;

pub async fn list(State(s): State<AppState>, caller: Caller, q: QueryPairs) -> ApiResult<Response> {
    q.check(LIST_PARAMS)?;
    let query = views::list_query(&q)?;
    let data = s.run(move |p| views::list_full(p, &query, &caller.actor)).await?;
    Ok(ok(data).into_response())
}

pub async fn create(
    State(s): State<AppState>,
    caller: Caller,
    JsonBody(draft): JsonBody<ResourceDraft>,
) -> ApiResult<Response> {
    let r = s.run(move |p| p.create_resource(draft, &caller.actor)).await?;
    Ok(created(r).into_response())
}

pub async fn detail(State(s): State<AppState>, caller: Caller, Path(id): Path<String>) -> ApiResult<Response> {
    let id: ResourceId = parse_id(&id, "resource")?;
    let data = s.run(move |p| views::detail_full(p, id, &caller.actor)).await?;
    Ok(ok(data).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpdateBody {
    expected_revision: u64,
    #[serde(default)]
    title: Option<String>,
    #[serde(default)]
    body: Option<String>,
    #[serde(default)]
    tier: Option<AccessTier>,
    #[serde(default)]
    taxonomy_ids: Option<BTreeSet<TaxonomyNodeId>>,
}

pub async fn update(
    State(s): State<AppState>,
    caller: Caller,
    Path(id): Path<String>,
    JsonBody(b): JsonBody<UpdateBody>,
) -> ApiResult<Response> {
    let id: ResourceId = parse_id(&id, "resource")?;
    let patch = ResourcePatch { title: b.title, body: b.body, tier: b.tier, taxonomy_ids: b.taxonomy_ids };
    let r = s.run(move |p| p.update_resource(id, patch, b.expected_revision, &caller.actor)).await?;
    Ok(ok(r).into_response())
}

pub async fn archive(State(s): State<AppState>, caller: Caller, Path(id): Path<String>) -> ApiResult<Response> {
    let id: ResourceId = parse_id(&id, "resource")?;
    let r = s.run(move |p| p.archive_resource(id, &caller.actor)).await?;
    Ok(ok(r).into_response())
}

pub async fn history(State(s): State<AppState>, caller: Caller, Path(id): Path<String>) -> ApiResult<Response> {
    let id: ResourceId = parse_id(&id, "resource")?;
    let h = s.run(move |p| p.revision_history(id, &caller.actor)).await?;
    Ok(ok(h).into_response())
}
