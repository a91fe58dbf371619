#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::response::Response;
use axum::Router;
use glyphforge_core::fixtures;
use glyphforge_service::{router, AppState, ServiceConfig};
use http_body_util::BodyExt;
use tempfile::TempDir;
use tower::ServiceExt;

/// A DF-1 deployment in a temporary directory.
pub struct Deployment {
    pub root: TempDir,
    pub config: ServiceConfig,
}

impl Deployment {
    pub fn df1() -> Deployment {
        let root = tempfile::tempdir().unwrap();
        let catalog_dir = root.path().join("catalog");
        fixtures::write_fixture(
            &catalog_dir,
            &fixtures::df1_catalog(),
            Some(&fixtures::df1_schema()),
            true,
        )
        .unwrap();
        let config = ServiceConfig {
            manifest: catalog_dir.join("manifest.jsonl"),
            schema: catalog_dir.join("schema.json"),
            corpus_dir: root.path().join("corpus"),
            log_dir: root.path().join("logs"),
            ui_dir: None,
        };
        Deployment { root, config }
    }

    pub fn path(&self) -> &Path {
        self.root.path()
    }

    pub fn catalog_dir(&self) -> PathBuf {
        self.root.path().join("catalog")
    }

    /// Builds a fresh app over the same directories, as a restart would.
    pub fn start(&self) -> (Arc<AppState>, Router) {
        let (state, _) = AppState::open(&self.config).unwrap();
        (state.clone(), router(state))
    }
}

pub async fn send(app: &Router, method: Method, uri: &str, body: Option<String>) -> Response {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, Body::from))
        .unwrap();
    app.clone().oneshot(req).await.unwrap()
}

pub async fn body_bytes(resp: Response) -> Vec<u8> {
    resp.into_body().collect().await.unwrap().to_bytes().to_vec()
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<String>) -> (StatusCode, Vec<u8>) {
    let resp = send(app, method, uri, body).await;
    let status = resp.status();
    (status, body_bytes(resp).await)
}

pub async fn call_json(
    app: &Router,
    method: Method,
    uri: &str,
    body: Option<String>,
) -> (StatusCode, serde_json::Value) {
    let (status, bytes) = call(app, method, uri, body).await;
    let value = if bytes.is_empty() {
        serde_json::Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|e| panic!("{uri}: {e}: {}", String::from_utf8_lossy(&bytes)))
    };
    (status, value)
}
