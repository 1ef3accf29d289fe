use axum::extract::State;
use axum::response::{IntoResponse, Response};
use belnet_core::Role;
use serde::Deserialize;

use crate::envelope::{created, ok, ApiResult};
use crate::extract::{Caller, JsonBody};
use crate::AppState;

pub async fn list(State(s): State<AppState>, caller: Caller) -> ApiResult<Response> {
    let all = s.run(move |p| p.list_principals(&caller.actor)).await?;
    Ok(ok(all).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewPrincipal {
    username: String,
    password: String,
    role: Role,
}

pub async fn create(
    State(s): State<AppState>,
    caller: Caller,
    JsonBody(b): JsonBody<NewPrincipal>,
) -> ApiResult<Response> {
    let p = s.run(move |p| p.create_principal(&b.username, &b.password, b.role, &caller.actor)).await?;
    Ok(created(p).into_response())
}
