//! Local-first workspace files.
//!
//! Each workspace is one pretty-printed JSON document at
//! `<root>/<id>.raws.json`. Writes go through a temp file in the same
//! directory and a rename, under an advisory lock on `<id>.raws.json.lock`.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::catalog::ScenarioId;
use crate::comparison::{Comparison, EditCommand};
use crate::export::PaperMetadata;
use crate::gateway::TransportRecord;

/// Highest schema version this build reads and the one it writes.
pub const SCHEMA_VERSION: u32 = 1;
pub const FILE_SUFFIX: &str = ".raws.json";

pub fn now() -> DateTime<Utc> {
    Utc::now().trunc_subsecs(0)
}

/// `[a-z0-9-]{1,64}`.
pub fn is_valid_id(id: &str) -> bool {
    (1..=64).contains(&id.len())
        && id
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextDoc {
    pub label: String,
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    Prompt,
    Chat,
    Ingest,
    Edit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceEntry {
    pub timestamp: DateTime<Utc>,
    pub kind: EntryKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioId>,
    /// Always present for prompt and chat entries; ingest entries carry the
    /// most recent prompt when there was one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_text: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ingest_warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edits: Vec<EditCommand>,
    pub pre_snapshot: String,
    pub post_snapshot: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transport: Option<TransportRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub schema_version: u32,
    pub id: String,
    pub created: DateTime<Utc>,
    pub modified: DateTime<Utc>,
    pub problem: String,
    #[serde(default)]
    pub contexts: Vec<ContextDoc>,
    pub comparison: Comparison,
    /// Bibliographic data per column label, used by the ORKG export.
    #[serde(default)]
    pub papers: BTreeMap<String, PaperMetadata>,
    #[serde(default)]
    pub log: Vec<ProvenanceEntry>,
    /// Fields written by newer builds, carried through untouched.
    #[serde(flatten)]
    pub extra: serde_json::Map<String, Value>,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("invalid workspace: {0}")]
    InvalidWorkspace(String),
    #[error("no workspace at {0}")]
    NotFound(PathBuf),
    #[error("workspace `{0}` already exists")]
    AlreadyExists(String),
    #[error("workspace schema version {found} is newer than supported version {supported}")]
    SchemaMismatch { found: u64, supported: u32 },
    #[error("corrupt workspace file: {0}")]
    CorruptFile(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl Workspace {
    pub fn new(id: &str, problem: &str) -> Result<Workspace, StoreError> {
        let ts = now();
        let ws = Workspace {
            schema_version: SCHEMA_VERSION,
            id: id.to_string(),
            created: ts,
            modified: ts,
            problem: problem.to_string(),
            contexts: Vec::new(),
            comparison: Comparison::new(problem),
            papers: BTreeMap::new(),
            log: Vec::new(),
            extra: serde_json::Map::new(),
        };
        ws.validate()?;
        Ok(ws)
    }

    pub fn validate(&self) -> Result<(), StoreError> {
        let bad = |m: String| Err(StoreError::InvalidWorkspace(m));
        if !is_valid_id(&self.id) {
            return bad(format!("id `{}` must match [a-z0-9-]{{1,64}}", self.id));
        }
        if let Err(e) = self.comparison.check_invariants() {
            return bad(e);
        }
        for (i, entry) in self.log.iter().enumerate() {
            let needs_prompt = matches!(entry.kind, EntryKind::Prompt | EntryKind::Chat);
            let has_prompt = entry.prompt_text.as_deref().is_some_and(|p| !p.is_empty());
            if needs_prompt && !has_prompt {
                return bad(format!("log entry {i} has no prompt text"));
            }
        }
        Ok(())
    }

    /// Serialized form as written by [`save`], without touching `modified`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("workspace serializes");
        bytes.push(b'\n');
        bytes
    }
}

/// `RA_HOME` if set, else `~/.ra-forge/workspaces`.
pub fn default_root() -> PathBuf {
    if let Some(home) = std::env::var_os("RA_HOME").filter(|v| !v.is_empty()) {
        return PathBuf::from(home);
    }
    dirs::home_dir()
        .unwrap_or_else(|| PathBuf::from("."))
        .join(".ra-forge")
        .join("workspaces")
}

pub fn workspace_path(root: &Path, id: &str) -> PathBuf {
    root.join(format!("{id}{FILE_SUFFIX}"))
}

/// Exclusive advisory lock on a workspace, released on drop.
pub struct WorkspaceLock {
    _file: File,
}

impl WorkspaceLock {
    pub fn acquire(root: &Path, id: &str) -> Result<WorkspaceLock, StoreError> {
        fs::create_dir_all(root).map_err(io_err(root))?;
        let path = root.join(format!("{id}{FILE_SUFFIX}.lock"));
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(io_err(&path))?;
        file.lock().map_err(io_err(&path))?;
        Ok(WorkspaceLock { _file: file })
    }
}

/// Writes `path` through a sibling temp file. If `fill` fails the temp file is
/// discarded and `path` keeps its previous contents.
pub fn atomic_write_with<F>(path: &Path, fill: F) -> io::Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::Builder::new()
        .prefix(".raws-")
        .suffix(".tmp")
        .tempfile_in(dir)?;
    fill(tmp.as_file_mut())?;
    tmp.as_file_mut().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Saves under the workspace lock, bumping `modified`.
pub fn save(workspace: &mut Workspace, root: &Path) -> Result<PathBuf, StoreError> {
    let _lock = WorkspaceLock::acquire(root, &workspace.id)?;
    save_locked(workspace, root)
}

/// Saves assuming the caller already holds the workspace lock.
pub fn save_locked(workspace: &mut Workspace, root: &Path) -> Result<PathBuf, StoreError> {
    workspace.validate()?;
    fs::create_dir_all(root).map_err(io_err(root))?;
    workspace.modified = now();
    let path = workspace_path(root, &workspace.id);
    let bytes = workspace.to_bytes();
    atomic_write_with(&path, |w| w.write_all(&bytes)).map_err(io_err(&path))?;
    Ok(path)
}

pub fn load(path: &Path) -> Result<Workspace, StoreError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            return Err(StoreError::NotFound(path.to_path_buf()))
        }
        Err(e) if e.kind() == io::ErrorKind::InvalidData => {
            return Err(StoreError::CorruptFile(format!("not UTF-8: {e}")))
        }
        Err(source) => return Err(io_err(path)(source)),
    };
    let value: Value =
        serde_json::from_str(&text).map_err(|e| StoreError::CorruptFile(e.to_string()))?;
    let version = value
        .get("schema_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| StoreError::CorruptFile("missing schema_version".into()))?;
    if version > u64::from(SCHEMA_VERSION) {
        return Err(StoreError::SchemaMismatch {
            found: version,
            supported: SCHEMA_VERSION,
        });
    }
    let ws: Workspace =
        serde_json::from_value(value).map_err(|e| StoreError::CorruptFile(e.to_string()))?;
    ws.validate()
        .map_err(|e| StoreError::CorruptFile(e.to_string()))?;
    Ok(ws)
}

pub fn load_id(root: &Path, id: &str) -> Result<Workspace, StoreError> {
    if !is_valid_id(id) {
        return Err(StoreError::InvalidWorkspace(format!(
            "id `{id}` must match [a-z0-9-]{{1,64}}"
        )));
    }
    load(&workspace_path(root, id))
}

/// Creates a new workspace file; fails if one already exists.
pub fn create(root: &Path, id: &str, problem: &str) -> Result<Workspace, StoreError> {
    let mut ws = Workspace::new(id, problem)?;
    let _lock = WorkspaceLock::acquire(root, id)?;
    if workspace_path(root, id).exists() {
        return Err(StoreError::AlreadyExists(id.to_string()));
    }
    save_locked(&mut ws, root)?;
    Ok(ws)
}

/// Load-modify-save under the lock. Nothing is written if `f` fails.
pub fn update<T, E>(
    root: &Path,
    id: &str,
    f: impl FnOnce(&mut Workspace) -> Result<T, E>,
) -> Result<(Workspace, T), E>
where
    E: From<StoreError>,
{
    if !is_valid_id(id) {
        return Err(StoreError::InvalidWorkspace(format!("id `{id}` is not a valid slug")).into());
    }
    let _lock = WorkspaceLock::acquire(root, id)?;
    let mut ws = load(&workspace_path(root, id))?;
    let out = f(&mut ws)?;
    save_locked(&mut ws, root)?;
    Ok((ws, out))
}

pub fn delete(root: &Path, id: &str) -> Result<(), StoreError> {
    if !is_valid_id(id) {
        return Err(StoreError::InvalidWorkspace(format!("id `{id}` is not a valid slug")));
    }
    let _lock = WorkspaceLock::acquire(root, id)?;
    let path = workspace_path(root, id);
    match fs::remove_file(&path) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Err(StoreError::NotFound(path)),
        Err(e) => Err(io_err(&path)(e)),
    }
}

/// Ids of all workspaces under `root`, sorted.
pub fn list(root: &Path) -> Result<Vec<String>, StoreError> {
    let entries = match fs::read_dir(root) {
        Ok(e) => e,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(root)(e)),
    };
    let mut ids: Vec<String> = entries
        .filter_map(Result::ok)
        .filter_map(|e| {
            e.file_name()
                .to_str()
                .and_then(|n| n.strip_suffix(FILE_SUFFIX))
                .filter(|id| is_valid_id(id))
                .map(str::to_string)
        })
        .collect();
    ids.sort();
    Ok(ids)
}
