//! End-to-end API checks shared by the API tests and the acceptance run.
//! Each returns `Err` with a description of the first broken expectation.

use belnet_core::{AccessTier, Role};
use reqwest::StatusCode;
use serde_json::{json, Value};

use super::{Reply, TestServer};

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn expect(r: &Reply, status: StatusCode, what: &str) -> Result<(), String> {
    ensure!(r.status == status, "{what}: expected {status}, got {} {}", r.status, r.text);
    Ok(())
}

fn ids(list: &Value) -> Vec<String> {
    list["items"]
        .as_array()
        .map(|a| a.iter().map(|i| i["id"].as_str().unwrap_or("").to_owned()).collect())
        .unwrap_or_default()
}

/// create → list → update → conflict → archive → history.
pub async fn crud_cycle(s: &TestServer) -> Result<(), String> {
    let editor = s.user(Role::Editor(AccessTier::Restricted)).await;
    let bodies = ["Attenuation $N = N_0 \\exp{-\\mu d}$.", "Half-value layer $d = \\frac{\\ln 2}{\\mu}$."];

    let r = s
        .post("/api/resources", Some(&editor), json!({ "title": "Absorption", "body": bodies[0], "tier": "limited" }))
        .await;
    expect(&r, StatusCode::CREATED, "create")?;
    let created = r.data();
    let id = created["id"].as_str().ok_or("create returned no id")?.to_owned();
    ensure!(created["current_revision"] == 0, "fresh revision is {}", created["current_revision"]);

    let listed = s.get("/api/resources", Some(&editor)).await;
    expect(&listed, StatusCode::OK, "list as editor")?;
    ensure!(ids(&listed.data()).contains(&id), "editor list lacks the new resource");
    let anon = s.get("/api/resources", None).await;
    expect(&anon, StatusCode::OK, "list as anonymous")?;
    ensure!(!ids(&anon.data()).contains(&id), "anonymous list shows a limited resource");

    let path = format!("/api/resources/{id}");
    let r = s.put(&path, Some(&editor), json!({ "expected_revision": 0, "body": bodies[1] })).await;
    expect(&r, StatusCode::OK, "update")?;
    ensure!(r.data()["current_revision"] == 1, "update did not advance the revision");

    let r = s.put(&path, Some(&editor), json!({ "expected_revision": 0, "title": "stale" })).await;
    expect(&r, StatusCode::CONFLICT, "stale update")?;
    ensure!(r.code() == "revision_conflict", "stale update code {}", r.code());
    ensure!(r.json()["current_revision"] == 1, "conflict does not report the current revision");

    let r = s.post(&format!("{path}/archive"), Some(&editor), json!({})).await;
    expect(&r, StatusCode::OK, "archive")?;
    ensure!(r.data()["archived"] == true, "archive flag not set");
    let listed = s.get("/api/resources", Some(&editor)).await.data();
    ensure!(!ids(&listed).contains(&id), "archived resource still listed by default");
    let listed = s.get("/api/resources?archived=true", Some(&editor)).await.data();
    ensure!(ids(&listed).contains(&id), "archived resource missing with archived=true");
    let r = s.put(&path, Some(&editor), json!({ "expected_revision": 1, "title": "late" })).await;
    expect(&r, StatusCode::NOT_FOUND, "edit after archive")?;

    let r = s.get(&format!("{path}/history"), Some(&editor)).await;
    expect(&r, StatusCode::OK, "history")?;
    let h = r.data();
    let h = h.as_array().ok_or("history is not a list")?;
    ensure!(h.len() == 2, "history has {} entries", h.len());
    for (k, rev) in h.iter().enumerate() {
        ensure!(rev["index"] == k, "revision {k} has index {}", rev["index"]);
        ensure!(rev["body"] == bodies[k], "revision {k} body differs");
    }
    Ok(())
}

/// Fragment etags are stable, honored with 304, change after writes, and
/// every fragment is a slice of its full endpoint.
pub async fn fragments(s: &TestServer) -> Result<(), String> {
    let res = s.seed("Gamma spectrometry", "Peak at $662$ keV", AccessTier::Open).await;
    let url = format!("{}/api/fragments/resource-list", s.base);

    let a = s.get("/api/fragments/resource-list", None).await;
    expect(&a, StatusCode::OK, "fragment")?;
    let etag = a.headers.get("etag").and_then(|v| v.to_str().ok()).ok_or("no etag header")?.to_owned();
    ensure!(a.data()["etag"] == etag.as_str(), "body etag differs from header");
    let b = s.get("/api/fragments/resource-list", None).await;
    ensure!(b.headers.get("etag").and_then(|v| v.to_str().ok()) == Some(etag.as_str()), "etag not stable");

    let r = s.client.get(&url).header("if-none-match", &etag).send().await.map_err(|e| e.to_string())?;
    ensure!(r.status() == StatusCode::NOT_MODIFIED, "matching etag gave {}", r.status());
    ensure!(r.text().await.map_err(|e| e.to_string())?.is_empty(), "304 carried a body");

    s.seed("Beta decay", "text", AccessTier::Open).await;
    let r = s.client.get(&url).header("if-none-match", &etag).send().await.map_err(|e| e.to_string())?;
    let r = Reply::from(r).await;
    expect(&r, StatusCode::OK, "fragment after write")?;
    ensure!(r.data()["etag"] != etag.as_str(), "etag unchanged after a write");

    let r = s.get("/api/fragments/no-such-region", None).await;
    expect(&r, StatusCode::NOT_FOUND, "unknown fragment")?;

    let id = res.id;
    let pairs = [
        ("resource-list".to_owned(), "/api/resources".to_owned()),
        (format!("resource-detail?id={id}"), format!("/api/resources/{id}")),
        ("glossary-panel".to_owned(), "/api/glossary".to_owned()),
        (format!("labwork-panel?id={id}"), format!("/api/labworks/{id}")),
    ];
    for (frag, full) in pairs {
        let f = s.get(&format!("/api/fragments/{frag}"), None).await;
        expect(&f, StatusCode::OK, &frag)?;
        let full_r = s.get(&full, None).await;
        expect(&full_r, StatusCode::OK, &full)?;
        let (payload, page) = (f.data()["payload"].clone(), full_r.data());
        let (p, g) =
            (payload.as_object().ok_or("payload not an object")?, page.as_object().ok_or("page not an object")?);
        ensure!(p.len() < g.len(), "{frag} is not a strict subset of {full}");
        for (k, v) in p {
            ensure!(g.get(k) == Some(v), "{frag}.{k} differs from {full}");
        }
    }
    Ok(())
}

/// Markup errors come back as 422 with the parser's own position.
pub async fn markup_positions(s: &TestServer) -> Result<(), String> {
    let editor = s.user(Role::Editor(AccessTier::Restricted)).await;
    let sources = ["$x^{2$", "first line\n\nthen $\\frac{a}$ here", "ok\n\\q@", "a $b", "$\\nosuchcommand$"];
    let before = s.get("/api/resources?archived=true", Some(&editor)).await.data()["total_count"].clone();
    for src in sources {
        let err = belnet_markup::parse(src).err().ok_or_else(|| format!("{src:?} unexpectedly parses"))?;
        let want = json!({
            "line": err.position.line,
            "column": err.position.column,
            "expected": err.expected,
            "found": err.found,
        });
        let r = s.post("/api/resources", Some(&editor), json!({ "title": "t", "body": src, "tier": "open" })).await;
        expect(&r, StatusCode::UNPROCESSABLE_ENTITY, src)?;
        ensure!(r.code() == "markup_error", "{src:?} code {}", r.code());
        ensure!(r.json()["position"] == want, "{src:?}: position {} != {want}", r.json()["position"]);

        let r = s.post("/api/render", None, json!({ "source": src })).await;
        expect(&r, StatusCode::UNPROCESSABLE_ENTITY, "render")?;
        ensure!(r.json()["position"] == want, "render position differs for {src:?}");
    }
    let after = s.get("/api/resources?archived=true", Some(&editor)).await.data()["total_count"].clone();
    ensure!(before == after, "rejected bodies created resources");

    let res = s.seed("Doc", "fine", AccessTier::Open).await;
    let r = s
        .put(
            &format!("/api/resources/{}", res.id),
            Some(&editor),
            json!({ "expected_revision": 0, "body": "$\\sqrt{x$" }),
        )
        .await;
    expect(&r, StatusCode::UNPROCESSABLE_ENTITY, "update with bad markup")?;
    ensure!(r.json()["position"]["line"] == 1, "update position missing");
    Ok(())
}

/// Traversal, oversize bodies, wrong upload media types and malformed
/// queries are rejected before reaching a handler.
pub async fn rejections(s: &TestServer) -> Result<(), String> {
    for path in [
        "/api/resources/../../etc",
        "/api/../etc/passwd",
        "/api/resources/./x",
        "/api/%2e%2e/secret",
        "/api/resources/%2E%2E",
        "/api/resources/a%2fb",
        "/api/resources/a%5c..",
        "/api/resources/a%00",
    ] {
        let (status, _) = s.raw(&format!("GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")).await;
        ensure!(status == 400, "{path} gave {status}");
    }
    for query in ["q=%zz", "q=%ff%fe", "bogus=1", "limit=abc", "limit=1&limit=2", "sort=nonsense", "tier=secret"] {
        let (status, _) = s
            .raw(&format!("GET /api/resources?{query} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n"))
            .await;
        ensure!(status == 400, "?{query} gave {status}");
    }

    let editor = s.user(Role::Editor(AccessTier::Restricted)).await;
    let limit = s.config.max_body_bytes as usize;
    let big = json!({ "title": "t", "body": "x".repeat(limit + 1), "tier": "open" });
    let r = s.post("/api/resources", Some(&editor), big).await;
    expect(&r, StatusCode::PAYLOAD_TOO_LARGE, "oversized JSON body")?;

    let res = s.seed("Target", "", AccessTier::Open).await;
    let url = format!("{}/api/resources/{}/attachments", s.base, res.id);
    let upload = |bytes: Vec<u8>| {
        let part = reqwest::multipart::Part::bytes(bytes).file_name("clip.mp4").mime_str("video/mp4").unwrap();
        reqwest::multipart::Form::new().text("kind", "video").part("file", part)
    };
    let max = s.config.max_upload_bytes as usize;
    let r = s.client.post(&url).bearer_auth(&editor).multipart(upload(vec![7; max + 1])).send().await;
    let r = Reply::from(r.map_err(|e| e.to_string())?).await;
    expect(&r, StatusCode::PAYLOAD_TOO_LARGE, "upload one byte over the limit")?;
    let r = s.client.post(&url).bearer_auth(&editor).multipart(upload(vec![7; max * 3])).send().await;
    match r {
        Ok(r) => ensure!(r.status() == StatusCode::PAYLOAD_TOO_LARGE, "far oversized upload gave {}", r.status()),
        Err(e) => ensure!(e.is_request() || e.is_body(), "far oversized upload failed oddly: {e}"),
    }
    let r = s.client.post(&url).bearer_auth(&editor).multipart(upload(vec![7; max])).send().await;
    let r = Reply::from(r.map_err(|e| e.to_string())?).await;
    expect(&r, StatusCode::CREATED, "upload at the limit")?;

    let r = s.client.post(&url).bearer_auth(&editor).header("content-type", "application/json").body("{}").send().await;
    let r = Reply::from(r.map_err(|e| e.to_string())?).await;
    expect(&r, StatusCode::UNSUPPORTED_MEDIA_TYPE, "JSON to the upload route")?;
    Ok(())
}
