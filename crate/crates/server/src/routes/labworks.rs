use axum::extract::{Path, State};
use axum::response::{IntoResponse, Response};
use belnet_core::ResourceId;

use crate::envelope::{ok, ApiResult};
use crate::extract::{parse_id, Caller};
use crate::views;
use crate::AppState;

pub async fn get(State(s): State<AppState>, caller: Caller, Path(id): Path<String>) -> ApiResult<Response> {
    let id: ResourceId = parse_id(&id, "lab work")?;
    let data = s.run(move |p| views::labwork_full(p, id, &caller.actor)).await?;
    Ok(ok(data).into_response())
}
