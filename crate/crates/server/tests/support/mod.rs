#![allow(dead_code)]

pub mod contract;

use std::net::SocketAddr;
use std::sync::Arc;

use belnet_core::{AccessTier, Actor, PasswordParams, Portal, PortalConfig, Resource, ResourceDraft, Role};
use belnet_server::{router, AppState, ServerConfig};
use belnet_store::Store;
use reqwest::{Method, StatusCode};
use serde_json::Value;
use tempfile::TempDir;
use tokio::io::{AsyncReadExt, AsyncWriteExt};

pub const PASSWORD: &str = "a long enough password";

pub struct TestServer {
    pub addr: SocketAddr,
    pub base: String,
    pub client: reqwest::Client,
    pub portal: Arc<Portal>,
    pub config: ServerConfig,
    _dir: TempDir,
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: reqwest::header::HeaderMap,
    pub text: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("not JSON ({e}): {}", self.text))
    }

    pub fn data(&self) -> Value {
        let v = self.json();
        assert_eq!(v["status"], "ok", "{}", self.text);
        v["data"].clone()
    }

    pub fn code(&self) -> String {
        self.json()["code"].as_str().unwrap_or_default().to_owned()
    }
}

pub async fn spawn() -> TestServer {
    spawn_with(ServerConfig::default()).await
}

pub async fn spawn_with(config: ServerConfig) -> TestServer {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(Store::open(dir.path()).unwrap());
    let portal_config = PortalConfig {
        password: PasswordParams::insecure_fast(),
        max_attachment_bytes: config.max_upload_bytes,
        ..PortalConfig::default()
    };
    let portal = Arc::new(Portal::new(store, portal_config));
    let app = router(AppState::new(portal.clone(), config.clone()));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    TestServer {
        addr,
        base: format!("http://{addr}"),
        client: reqwest::Client::builder().redirect(reqwest::redirect::Policy::none()).build().unwrap(),
        portal,
        config,
        _dir: dir,
    }
}

impl TestServer {
    pub async fn call(&self, method: Method, path: &str, token: Option<&str>, body: Option<Value>) -> Reply {
        let mut req = self.client.request(method, format!("{}{path}", self.base));
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp = req.send().await.unwrap();
        Reply::from(resp).await
    }

    pub async fn get(&self, path: &str, token: Option<&str>) -> Reply {
        self.call(Method::GET, path, token, None).await
    }

    pub async fn post(&self, path: &str, token: Option<&str>, body: Value) -> Reply {
        self.call(Method::POST, path, token, Some(body)).await
    }

    pub async fn put(&self, path: &str, token: Option<&str>, body: Value) -> Reply {
        self.call(Method::PUT, path, token, Some(body)).await
    }

    /// Creates an account with `role` and logs it in over HTTP.
    pub async fn user(&self, role: Role) -> String {
        let name = format!("u{}", uuid_like());
        let portal = self.portal.clone();
        let n = name.clone();
        tokio::task::spawn_blocking(move || portal.create_principal(&n, PASSWORD, role, &Actor::system()).unwrap())
            .await
            .unwrap();
        self.login(&name, PASSWORD).await
    }

    pub async fn login(&self, username: &str, password: &str) -> String {
        let r =
            self.post("/api/session", None, serde_json::json!({ "username": username, "password": password })).await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.text);
        r.data()["token"].as_str().unwrap().to_owned()
    }

    /// Seeds a resource directly through the portal.
    pub async fn seed(&self, title: &str, body: &str, tier: AccessTier) -> Resource {
        let portal = self.portal.clone();
        let draft = ResourceDraft { title: title.into(), body: body.into(), tier, ..Default::default() };
        tokio::task::spawn_blocking(move || portal.create_resource(draft, &Actor::system()).unwrap()).await.unwrap()
    }

    /// Sends raw bytes on a fresh connection and returns the status and body.
    pub async fn raw(&self, request: &str) -> (u16, String) {
        raw_request(self.addr, request.as_bytes()).await
    }
}

impl Reply {
    pub async fn from(resp: reqwest::Response) -> Reply {
        let status = resp.status();
        let headers = resp.headers().clone();
        let text = resp.text().await.unwrap();
        Reply { status, headers, text }
    }
}

pub async fn raw_request(addr: SocketAddr, request: &[u8]) -> (u16, String) {
    let mut s = tokio::net::TcpStream::connect(addr).await.unwrap();
    s.write_all(request).await.unwrap();
    let mut buf = Vec::new();
    s.read_to_end(&mut buf).await.unwrap();
    let text = String::from_utf8_lossy(&buf).into_owned();
    let status = text.split_whitespace().nth(1).and_then(|c| c.parse().ok()).unwrap_or(0);
    (status, text)
}

fn uuid_like() -> String {
    format!("{:016x}", rand::random::<u64>())
}
