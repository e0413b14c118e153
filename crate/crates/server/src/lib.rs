//! Local HTTP API over workbench workspaces.
//!
//! Every route maps onto a [`raforge_core::session`] step so that the web
//! client and the CLI produce identical workspaces. Writes to one workspace
//! are serialized; different workspaces proceed in parallel.

mod error;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use raforge_core::catalog::{Catalog, ScenarioId, ScenarioInputs, TaskScenario};
use raforge_core::comparison::{Comparison, EditCommand, MergeStrategy};
use raforge_core::export::{EmptyCellPolicy, Flavor, LineEnding, PaperMetadata};
use raforge_core::ingest::ParsedIngest;
use raforge_core::session::{ExportOptions, SessionError};
use raforge_core::workspace::{self, Workspace};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

pub use error::ApiError;

pub struct AppState {
    root: PathBuf,
    catalog: Catalog,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl AppState {
    pub fn new(root: impl Into<PathBuf>, catalog: Catalog) -> Arc<Self> {
        Arc::new(AppState {
            root: root.into(),
            catalog,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn writer_lock(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table poisoned");
        Arc::clone(locks.entry(id.to_string()).or_default())
    }
}

type Shared = Arc<AppState>;

/// The API router, optionally serving static web assets from `static_dir`.
pub fn router(state: Shared, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/tasks", get(list_tasks))
        .route("/api/workspaces", get(list_workspaces).post(create_workspace))
        .route(
            "/api/workspaces/{id}",
            get(get_workspace).delete(delete_workspace),
        )
        .route("/api/workspaces/{id}/prompt", post(prompt))
        .route("/api/workspaces/{id}/ingest", post(ingest))
        .route("/api/workspaces/{id}/edits", post(edits))
        .route("/api/workspaces/{id}/papers", axum::routing::put(put_papers))
        .route("/api/workspaces/{id}/export", get(export))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub struct ServeConfig {
    pub host: String,
    pub port: u16,
    pub root: PathBuf,
    pub catalog: Catalog,
    pub static_dir: Option<PathBuf>,
}

/// Binds and serves until the process is stopped.
pub async fn serve(config: ServeConfig) -> std::io::Result<()> {
    let state = AppState::new(config.root, config.catalog);
    let app = router(state, config.static_dir.as_deref());
    let listener = tokio::net::TcpListener::bind((config.host.as_str(), config.port)).await?;
    let addr: SocketAddr = listener.local_addr()?;
    println!("listening on http://{addr}");
    axum::serve(listener, app).await
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_body", e.body_text()))
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

/// Runs `f` on the workspace under the per-workspace writer lock and saves.
async fn mutate<T, F>(state: &Shared, id: String, f: F) -> Result<(Workspace, T), ApiError>
where
    F: FnOnce(&Catalog, &mut Workspace) -> Result<T, SessionError> + Send + 'static,
    T: Send + 'static,
{
    let lock = state.writer_lock(&id);
    let _guard = lock.lock().await;
    let state = Arc::clone(state);
    blocking(move || {
        workspace::update(&state.root, &id, |ws| f(&state.catalog, ws)).map_err(ApiError::from)
    })
    .await
}

async fn list_tasks(State(state): State<Shared>) -> Json<Vec<TaskScenario>> {
    Json(state.catalog.list_scenarios().to_vec())
}

#[derive(Serialize)]
struct WorkspaceView {
    snapshot_hash: String,
    workspace: Workspace,
}

impl From<Workspace> for WorkspaceView {
    fn from(workspace: Workspace) -> Self {
        WorkspaceView {
            snapshot_hash: workspace.comparison.snapshot_hash(),
            workspace,
        }
    }
}

async fn list_workspaces(State(state): State<Shared>) -> Result<Json<Vec<String>>, ApiError> {
    let state = Arc::clone(&state);
    blocking(move || workspace::list(&state.root).map(Json).map_err(ApiError::from)).await
}

#[derive(Deserialize)]
struct CreateWorkspace {
    id: String,
    #[serde(default)]
    problem: String,
}

async fn create_workspace(
    State(state): State<Shared>,
    payload: Result<Json<CreateWorkspace>, JsonRejection>,
) -> Result<(StatusCode, Json<WorkspaceView>), ApiError> {
    let req = body(payload)?;
    let lock = state.writer_lock(&req.id);
    let _guard = lock.lock().await;
    let st = Arc::clone(&state);
    let ws = blocking(move || {
        workspace::create(&st.root, &req.id, &req.problem).map_err(ApiError::from)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(ws.into())))
}

async fn get_workspace(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<WorkspaceView>, ApiError> {
    let st = Arc::clone(&state);
    let ws = blocking(move || workspace::load_id(&st.root, &id).map_err(ApiError::from)).await?;
    Ok(Json(ws.into()))
}

async fn delete_workspace(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> Result<StatusCode, ApiError> {
    let lock = state.writer_lock(&id);
    let _guard = lock.lock().await;
    let st = Arc::clone(&state);
    blocking(move || workspace::delete(&st.root, &id).map_err(ApiError::from)).await?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Deserialize)]
struct PromptRequest {
    scenario: String,
    #[serde(default)]
    inputs: ScenarioInputs,
}

#[derive(Serialize)]
struct PromptResponse {
    scenario: ScenarioId,
    prompt: String,
}

async fn prompt(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
    payload: Result<Json<PromptRequest>, JsonRejection>,
) -> Result<Json<PromptResponse>, ApiError> {
    let req = body(payload)?;
    let scenario: ScenarioId = req
        .scenario
        .parse()
        .map_err(|e: raforge_core::catalog::CatalogError| ApiError::from(SessionError::from(e)))?;
    let (_, prompt) = mutate(&state, id, move |catalog, ws| {
        ws.prompt(catalog, scenario, &req.inputs)
    })
    .await?;
    Ok(Json(PromptResponse { scenario, prompt }))
}

#[derive(Deserialize)]
struct IngestRequest {
    text: String,
    #[serde(default)]
    strategy: MergeStrategy,
}

#[derive(Serialize)]
struct IngestResponse {
    summary: ParsedIngest,
    comparison: Comparison,
    snapshot_hash: String,
}

async fn ingest(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
    payload: Result<Json<IngestRequest>, JsonRejection>,
) -> Result<Json<IngestResponse>, ApiError> {
    let req = body(payload)?;
    let (ws, outcome) = mutate(&state, id, move |_, ws| ws.ingest(&req.text, req.strategy)).await?;
    Ok(Json(IngestResponse {
        summary: outcome.parsed,
        snapshot_hash: outcome.snapshot_hash,
        comparison: ws.comparison,
    }))
}

#[derive(Deserialize)]
struct EditBatch {
    #[serde(default)]
    base_hash: Option<String>,
    #[serde(default)]
    commands: Vec<EditCommand>,
}

#[derive(Serialize)]
struct ComparisonView {
    comparison: Comparison,
    snapshot_hash: String,
}

async fn edits(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
    payload: Result<Json<EditBatch>, JsonRejection>,
) -> Result<Json<ComparisonView>, ApiError> {
    let req = body(payload)?;
    let (ws, hash) = mutate(&state, id, move |_, ws| {
        ws.apply_edits(&req.commands, req.base_hash.as_deref())
    })
    .await?;
    Ok(Json(ComparisonView {
        comparison: ws.comparison,
        snapshot_hash: hash,
    }))
}

async fn put_papers(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
    payload: Result<Json<std::collections::BTreeMap<String, PaperMetadata>>, JsonRejection>,
) -> Result<Json<WorkspaceView>, ApiError> {
    let papers = body(payload)?;
    let (ws, ()) = mutate(&state, id, move |_, ws| {
        ws.papers = papers;
        Ok(())
    })
    .await?;
    Ok(Json(ws.into()))
}

#[derive(Deserialize)]
struct ExportQuery {
    #[serde(default)]
    flavor: Option<String>,
    #[serde(default)]
    empty: Option<String>,
    #[serde(default)]
    line_ending: Option<String>,
}

fn export_options(q: &ExportQuery) -> Result<(Flavor, ExportOptions), ApiError> {
    let invalid = |field: &str, msg: String| {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_query", msg).with_pointer(field)
    };
    let flavor = match &q.flavor {
        Some(f) => f.parse().map_err(|e| invalid("flavor", e))?,
        None => Flavor::GenericComparison,
    };
    let empty_cell_policy = match q.empty.as_deref() {
        None | Some("empty") => EmptyCellPolicy::Empty,
        Some("na") | Some("literal_na") => EmptyCellPolicy::LiteralNa,
        Some(other) => return Err(invalid("empty", format!("unknown empty-cell policy `{other}`"))),
    };
    let line_ending = match q.line_ending.as_deref() {
        None | Some("lf") | Some("LF") => LineEnding::LF,
        Some("crlf") | Some("CRLF") => LineEnding::CRLF,
        Some(other) => return Err(invalid("line_ending", format!("unknown line ending `{other}`"))),
    };
    Ok((
        flavor,
        ExportOptions {
            empty_cell_policy,
            line_ending,
            ..Default::default()
        },
    ))
}

async fn export(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Query(query): Query<ExportQuery>,
) -> Result<Response, ApiError> {
    let (flavor, options) = export_options(&query)?;
    let st = Arc::clone(&state);
    let (bytes, name) = blocking(move || {
        let ws = workspace::load_id(&st.root, &id)?;
        let bytes = ws.export(flavor, &options)?;
        Ok((bytes, flavor.file_name(&ws.id)))
    })
    .await?;
    let disposition = HeaderValue::from_str(&format!("attachment; filename=\"{name}\""))
        .map_err(|e| ApiError::internal(e.to_string()))?;
    Ok((
        [
            (
                header::CONTENT_TYPE,
                HeaderValue::from_static("text/csv; charset=utf-8"),
            ),
            (header::CONTENT_DISPOSITION, disposition),
        ],
        bytes,
    )
        .into_response())
}
