//! HTTP API of the knowledge portal.
//!
//! All routes live under `/api` and answer with the JSON envelope described
//! in [`envelope`]. Requests are screened by [`validate::validate_request`]
//! before routing; the caller is resolved from an optional
//! `Authorization: Bearer` token, and unknown or expired tokens quietly
//! become the anonymous actor.

pub mod envelope;
pub mod extract;
mod routes;
pub mod validate;
pub mod views;

use std::sync::Arc;

use axum::extract::DefaultBodyLimit;
use axum::http::StatusCode;
use axum::middleware::from_fn_with_state;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::Router;
use belnet_core::{Portal, PortalError, DEFAULT_MAX_ATTACHMENT_BYTES};

use crate::envelope::{ApiError, ApiResult};
use crate::validate::{Limits, MULTIPART_SLACK};

pub use routes::fragments::FRAGMENTS;

pub const DEFAULT_MAX_BODY_BYTES: u64 = 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerConfig {
    /// Largest accepted attachment or spectrum upload.
    pub max_upload_bytes: u64,
    /// Largest accepted body on every other route.
    pub max_body_bytes: u64,
    /// The port TLS is served on, when it is.
    pub tls_port: Option<u16>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self { max_upload_bytes: DEFAULT_MAX_ATTACHMENT_BYTES, max_body_bytes: DEFAULT_MAX_BODY_BYTES, tls_port: None }
    }
}

impl ServerConfig {
    pub fn limits(&self) -> Limits {
        Limits {
            max_body_bytes: self.max_body_bytes,
            max_upload_bytes: self.max_upload_bytes,
            https_port: self.tls_port,
        }
    }

    fn upload_body_limit(&self) -> usize {
        usize::try_from(self.max_upload_bytes.saturating_add(MULTIPART_SLACK)).unwrap_or(usize::MAX)
    }
}

#[derive(Clone)]
pub struct AppState {
    pub portal: Arc<Portal>,
    pub config: Arc<ServerConfig>,
}

impl AppState {
    pub fn new(portal: Arc<Portal>, config: ServerConfig) -> Self {
        Self { portal, config: Arc::new(config) }
    }

    /// Runs a portal call off the async workers; store commits fsync and
    /// password checks are deliberately slow.
    pub async fn run<T, F>(&self, f: F) -> ApiResult<T>
    where
        T: Send + 'static,
        F: FnOnce(&Portal) -> Result<T, PortalError> + Send + 'static,
    {
        let portal = self.portal.clone();
        match tokio::task::spawn_blocking(move || f(&portal)).await {
            Ok(r) => r.map_err(ApiError::from),
            Err(e) => {
                tracing::error!(error = %e, "portal task failed");
                Err(ApiError::internal())
            }
        }
    }
}

pub fn router(state: AppState) -> Router {
    use routes::*;

    let upload = DefaultBodyLimit::max(state.config.upload_body_limit());
    Router::new()
        .route("/api/resources", get(resources::list).post(resources::create))
        .route("/api/resources/{id}", get(resources::detail).put(resources::update))
        .route("/api/resources/{id}/archive", post(resources::archive))
        .route("/api/resources/{id}/history", get(resources::history))
        .route("/api/resources/{id}/attachments", post(attachments::upload).layer(upload))
        .route("/api/resources/{id}/taxonomy/{node}", post(taxonomy::assign))
        .route("/api/attachments/{id}", get(attachments::download))
        .route("/api/glossary", get(glossary::search))
        .route("/api/glossary/{term}", put(glossary::upsert))
        .route("/api/taxonomy", get(taxonomy::list).post(taxonomy::create))
        .route("/api/session", get(session::current).post(session::login).delete(session::logout))
        .route("/api/principals", get(principals::list).post(principals::create))
        .route("/api/fragments/{fragment_id}", get(fragments::get))
        .route("/api/labworks/{id}", get(labworks::get))
        .route("/api/labkit/spectrum", post(labkit::spectrum).layer(upload))
        .route("/api/labkit/attenuation-fit", post(labkit::attenuation_fit))
        .route("/api/labkit/relative-activity", post(labkit::relative_activity))
        .route("/api/labkit/check", post(labkit::check))
        .route("/api/render", post(render::render))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .layer(from_fn_with_state(state.clone(), validate::screen))
        .with_state(state)
}

/// Router for a plain-HTTP listener that redirects everything to HTTPS.
pub fn redirect_router(https_port: u16) -> Router {
    let limits = Limits { max_body_bytes: 0, max_upload_bytes: 0, https_port: Some(https_port) };
    Router::new().fallback(validate::redirect_only).with_state(limits)
}

async fn not_found() -> Response {
    ApiError::not_found("no such route").into_response()
}

async fn method_not_allowed() -> Response {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed on this route")
        .into_response()
}
