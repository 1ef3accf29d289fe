use axum::extract::{Path, State};
use axum::response::{IntoResponse, Response};
use belnet_core::{ResourceId, TaxonomyNodeId};
use serde::Deserialize;

use crate::envelope::{created, ok, ApiResult};
use crate::extract::{parse_id, Caller, JsonBody};
use crate::AppState;

pub async fn list(State(s): State<AppState>) -> ApiResult<Response> {
    let nodes = s.run(|p| p.list_taxonomy()).await?;
    Ok(ok(nodes).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeBody {
    #[serde(default)]
    parent_id: Option<TaxonomyNodeId>,
    label: String,
}

pub async fn create(State(s): State<AppState>, caller: Caller, JsonBody(b): JsonBody<NodeBody>) -> ApiResult<Response> {
    let n = s.run(move |p| p.add_taxonomy_node(b.parent_id, &b.label, &caller.actor)).await?;
    Ok(created(n).into_response())
}

pub async fn assign(
    State(s): State<AppState>,
    caller: Caller,
    Path((id, node)): Path<(String, String)>,
) -> ApiResult<Response> {
    let id: ResourceId = parse_id(&id, "resource")?;
    let node: TaxonomyNodeId = parse_id(&node, "taxonomy node")?;
    let r = s.run(move |p| p.assign_resource(id, node, &caller.actor)).await?;
    Ok(ok(r).into_response())
}
