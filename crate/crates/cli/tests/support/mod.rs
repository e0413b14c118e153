//! The scripted demo session, driven through the binary and through the
//! HTTP router.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use http_body_util::BodyExt;
use raforge_core::catalog::{Catalog, ScenarioId};
use raforge_core::testing::{corpus, golden};
use raforge_core::workspace;
use raforge_server::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

pub const WS: &str = "gpt-demo";
pub const DROPPED: &str = "optimizer";

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn golden_csv(name: &str) -> Vec<u8> {
    std::fs::read(golden_dir().join(name)).expect("golden csv")
}

/// Generic and definitions CSVs produced by one session, and the final
/// snapshot hash of the stored comparison.
#[derive(Debug, PartialEq, Eq)]
pub struct Exports {
    pub comparison: Vec<u8>,
    pub definitions: Vec<u8>,
    pub snapshot: String,
}

fn snapshot(root: &Path) -> Result<String, String> {
    workspace::load_id(root, WS)
        .map(|ws| ws.comparison.snapshot_hash())
        .map_err(|e| e.to_string())
}

impl Exports {
    pub fn check_goldens(&self) -> Result<(), String> {
        for (name, got) in [
            ("gpt-demo-comparison.csv", &self.comparison),
            ("gpt-demo-definitions.csv", &self.definitions),
        ] {
            if *got != golden_csv(name) {
                return Err(format!("{name} differs:\n{}", String::from_utf8_lossy(got)));
            }
        }
        Ok(())
    }
}

fn ra(root: &Path, args: &[&str]) -> Result<Output, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ra-forge"))
        .arg("--home")
        .arg(root)
        .args(args)
        .env_remove("RA_HOME")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "ra-forge {} exited with {}: {}",
            args.join(" "),
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out)
}

/// new workspace, prompt, ingest, delete a dimension, export.
pub fn cli_session(root: &Path) -> Result<Exports, String> {
    ra(root, &["ws", "new", WS, "--problem", golden::GPT_PROBLEM])?;

    let mut prompt = vec!["prompt", "compare-contexts", "--ws", WS];
    let paths: Vec<String> = golden::GPT_LABELS
        .iter()
        .map(|l| golden::context_path(l).display().to_string())
        .collect();
    for (label, path) in golden::GPT_LABELS.iter().zip(&paths) {
        prompt.extend(["--context", path, "--label", label]);
    }
    let out = ra(root, &prompt)?;
    if String::from_utf8_lossy(&out.stdout) != golden::template_golden(ScenarioId::CompareContexts) {
        return Err("printed prompt differs from the template golden".into());
    }

    let fixture = corpus::fixtures_dir().join(format!("{}.md", golden::GPT_FIXTURE));
    ra(root, &["ingest", "--ws", WS, &fixture.display().to_string()])?;
    ra(root, &["edit", "--ws", WS, "delete-dimension", DROPPED])?;
    Ok(Exports {
        comparison: ra(root, &["export", "--ws", WS, "-o", "-"])?.stdout,
        definitions: ra(root, &["export", "--ws", WS, "--flavor", "definitions", "-o", "-"])?.stdout,
        snapshot: snapshot(root)?,
    })
}

async fn call(app: &axum::Router, method: Method, uri: &str, body: Option<Value>) -> Result<Vec<u8>, String> {
    let mut req = Request::builder().method(method.clone()).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header(header::CONTENT_TYPE, "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app
        .clone()
        .oneshot(req.body(body).map_err(|e| e.to_string())?)
        .await
        .map_err(|e| e.to_string())?;
    let status = resp.status();
    let bytes = resp.into_body().collect().await.map_err(|e| e.to_string())?.to_bytes().to_vec();
    if !(status == StatusCode::OK || status == StatusCode::CREATED) {
        return Err(format!("{method} {uri}: {status} {}", String::from_utf8_lossy(&bytes)));
    }
    Ok(bytes)
}

/// The same session through the HTTP API.
pub fn http_session(root: &Path) -> Result<Exports, String> {
    let app = router(AppState::new(root, Catalog::builtin().clone()), None);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(async {
        call(&app, Method::POST, "/api/workspaces", Some(json!({"id": WS, "problem": golden::GPT_PROBLEM}))).await?;
        // The CLI records each context's file path; send the same inputs.
        let contexts: Vec<Value> = golden::gpt_contexts()
            .into_iter()
            .zip(golden::GPT_LABELS)
            .map(|(c, l)| json!({"label": c.label, "body": c.body, "source": golden::context_path(l)}))
            .collect();
        let reply = call(
            &app,
            Method::POST,
            &format!("/api/workspaces/{WS}/prompt"),
            Some(json!({"scenario": "compare-contexts", "inputs": {"contexts": contexts}})),
        )
        .await?;
        let reply: Value = serde_json::from_slice(&reply).map_err(|e| e.to_string())?;
        let prompt = format!("{}\n", reply["prompt"].as_str().unwrap_or_default());
        if prompt != golden::template_golden(ScenarioId::CompareContexts) {
            return Err("API prompt differs from the template golden".into());
        }
        call(
            &app,
            Method::POST,
            &format!("/api/workspaces/{WS}/ingest"),
            Some(json!({"text": corpus::fixture(golden::GPT_FIXTURE)})),
        )
        .await?;
        call(
            &app,
            Method::POST,
            &format!("/api/workspaces/{WS}/edits"),
            Some(json!({"commands": [{"kind": "DeleteDimension", "dimension": DROPPED}]})),
        )
        .await?;
        Ok(Exports {
            comparison: call(&app, Method::GET, &format!("/api/workspaces/{WS}/export?flavor=generic"), None).await?,
            definitions: call(&app, Method::GET, &format!("/api/workspaces/{WS}/export?flavor=definitions"), None)
                .await?,
            snapshot: snapshot(root)?,
        })
    })
}
