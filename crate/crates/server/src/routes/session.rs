use axum::extract::State;
use axum::response::{IntoResponse, Response};
use belnet_core::max_visible_tier;
use serde::Deserialize;
use serde_json::json;

use crate::envelope::{created, ok, ApiResult};
use crate::extract::{Caller, JsonBody};
use crate::AppState;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Credentials {
    username: String,
    password: String,
}

pub async fn login(State(s): State<AppState>, JsonBody(c): JsonBody<Credentials>) -> ApiResult<Response> {
    let (session, actor) = s
        .run(move |p| {
            let session = p.authenticate(&c.username, &c.password)?;
            let actor = p.resolve_token(Some(&session.token));
            Ok((session, actor))
        })
        .await?;
    Ok(created(json!({
        "token": session.token,
        "issued_at": session.issued_at,
        "expires_at": session.expires_at,
        "principal": { "id": session.principal_id, "username": actor.username, "role": actor.role },
    }))
    .into_response())
}

pub async fn logout(State(s): State<AppState>, caller: Caller) -> ApiResult<Response> {
    if let Some(token) = caller.token {
        s.run(move |p| p.revoke_session(&token)).await?;
    }
    Ok(ok(json!({ "revoked": true })).into_response())
}

pub async fn current(caller: Caller) -> ApiResult<Response> {
    let a = caller.actor;
    Ok(ok(json!({
        "authenticated": !a.is_anonymous(),
        "principal_id": a.principal,
        "username": a.username,
        "role": a.role,
        "max_visible_tier": max_visible_tier(&a.role),
    }))
    .into_response())
}
