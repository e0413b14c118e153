//! The `ra-forge` command line.
//!
//! [`run`] takes its arguments, environment and streams as parameters so
//! that tests can drive whole sessions in-process.

mod clipboard;
mod inputs;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use raforge_core::catalog::{
    Catalog, CatalogError, InputError, ScenarioId, ScenarioInputs, TaskScenario,
};
use raforge_core::comparison::{EditCommand, MergeStrategy};
use raforge_core::export::{EmptyCellPolicy, Flavor, LineEnding, PaperMetadata};
use raforge_core::gateway::GatewayConfig;
use raforge_core::session::{ExportOptions, SessionError};
use raforge_core::workspace::{self, StoreError, Workspace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ra-forge", version, about = "Research-assistant workbench: prompts, comparison tables and CSV export")]
struct Cli {
    /// Workspace directory (default: $RA_HOME, else ~/.ra-forge/workspaces).
    #[arg(long, global = true, value_name = "DIR")]
    home: Option<PathBuf>,
    /// Directory of template overrides, one `<scenario>.txt` each.
    #[arg(long, global = true, value_name = "DIR")]
    templates: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List or show task scenarios.
    #[command(subcommand)]
    Tasks(TasksCmd),
    /// Manage workspaces.
    #[command(subcommand)]
    Ws(WsCmd),
    /// Instantiate a scenario prompt.
    Prompt(PromptArgs),
    /// Parse a pasted chat response into the workspace comparison.
    Ingest(IngestArgs),
    /// Edit the workspace comparison.
    Edit(EditArgs),
    /// Write the comparison as CSV.
    Export(ExportArgs),
    /// Send a prompt to the configured chat endpoint and ingest the reply.
    Chat(ChatArgs),
    /// Serve the HTTP API on a loopback address.
    Serve(ServeArgs),
}

#[derive(Debug, Subcommand)]
enum TasksCmd {
    List {
        #[arg(long)]
        json: bool,
    },
    Show {
        scenario: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
enum WsCmd {
    New {
        id: String,
        #[arg(long, default_value = "")]
        problem: String,
    },
    Show {
        id: String,
        #[arg(long)]
        json: bool,
    },
    List {
        #[arg(long)]
        json: bool,
    },
    Delete {
        id: String,
    },
    /// Record bibliographic data for a column, used by the ORKG export.
    SetPaper {
        id: String,
        label: String,
        #[arg(long)]
        title: String,
        #[arg(long)]
        doi: Option<String>,
        #[arg(long)]
        year: Option<String>,
    },
}

#[derive(Debug, Args)]
struct SlotArgs {
    #[arg(long)]
    problem: Option<String>,
    /// A context file (`-` for stdin); repeat for several.
    #[arg(long = "context", value_name = "FILE")]
    contexts: Vec<String>,
    /// Label for the context at the same position.
    #[arg(long = "label")]
    labels: Vec<String>,
    #[arg(long = "entity")]
    entities: Vec<String>,
    /// Dimensions as .json, .csv or a pipe-markdown table.
    #[arg(long, value_name = "FILE")]
    dimensions: Option<String>,
    /// Use only these dimensions, by name.
    #[arg(long = "select", value_name = "NAME")]
    select: Vec<String>,
    #[arg(long)]
    call_objectives: Option<String>,
    #[arg(long, value_name = "FILE", conflicts_with = "call_objectives")]
    call_objectives_file: Option<String>,
    #[arg(long = "keyword")]
    keywords: Vec<String>,
}

#[derive(Debug, Args)]
struct PromptArgs {
    scenario: String,
    /// Record the prompt in this workspace and fill empty slots from it.
    #[arg(long)]
    ws: Option<String>,
    #[command(flatten)]
    slots: SlotArgs,
    /// Also copy the prompt to the clipboard.
    #[arg(long)]
    copy: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long)]
    ws: String,
    /// Response file, or `-` for stdin.
    file: String,
    #[arg(long, default_value = "replace")]
    strategy: MergeStrategy,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct EditArgs {
    #[arg(long)]
    ws: String,
    /// Refuse the edit unless the comparison is at this snapshot.
    #[arg(long)]
    base_hash: Option<String>,
    #[command(subcommand)]
    op: EditOp,
}

#[derive(Debug, Subcommand)]
enum EditOp {
    AddDimension {
        name: String,
        #[arg(long, default_value = "")]
        definition: String,
    },
    DeleteDimension {
        dimension: String,
    },
    RenameDimension {
        dimension: String,
        to: String,
    },
    SetDefinition {
        dimension: String,
        definition: String,
    },
    AddColumn {
        label: String,
        #[arg(long)]
        source_ref: Option<String>,
    },
    DeleteColumn {
        label: String,
    },
    RenameColumn {
        label: String,
        to: String,
    },
    SetCell {
        dimension: String,
        column: String,
        value: String,
    },
    /// Apply a JSON array of edit commands atomically.
    Batch {
        file: String,
    },
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    ws: String,
    #[arg(long, default_value = "generic")]
    flavor: Flavor,
    /// Output file, or `-` for stdout (default: <ws>-<flavor>.csv).
    #[arg(short, long)]
    output: Option<String>,
    /// Write N/A into empty cells.
    #[arg(long)]
    na: bool,
    #[arg(long)]
    crlf: bool,
    /// JSON map from column label to {title, doi, year}.
    #[arg(long, value_name = "FILE")]
    metadata: Option<String>,
}

#[derive(Debug, Args)]
struct ChatArgs {
    scenario: String,
    #[arg(long)]
    ws: String,
    #[command(flatten)]
    slots: SlotArgs,
    #[arg(long, default_value = "replace")]
    strategy: MergeStrategy,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 8457)]
    port: u16,
    /// Serve the web client from this directory.
    #[arg(long = "static", value_name = "DIR")]
    static_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Slot {
        scenario: Option<ScenarioId>,
        error: InputError,
    },
    Op(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Slot { .. } => EXIT_USAGE,
            CliError::Op(_) => EXIT_FAILURE,
        }
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::InvalidWorkspace(_) => CliError::Usage(e.to_string()),
            _ => CliError::Op(e.to_string()),
        }
    }
}

impl From<SessionError> for CliError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Input(error) => CliError::Slot { scenario: None, error },
            SessionError::Catalog(CatalogError::UnknownScenario(_)) => CliError::Usage(unknown_scenario_message(&e)),
            SessionError::Store(e) => e.into(),
            other => CliError::Op(other.to_string()),
        }
    }
}

fn unknown_scenario_message(e: &dyn std::fmt::Display) -> String {
    let known: Vec<&str> = ScenarioId::ALL.iter().map(|s| s.slug()).collect();
    format!("{e}; known scenarios: {}", known.join(", "))
}

/// Streams and environment for one invocation.
pub struct Io<'a> {
    pub env: &'a dyn Fn(&str) -> Option<String>,
    pub stdin: &'a mut dyn Read,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

struct Ctx<'a, 'b> {
    io: &'a mut Io<'b>,
    root: PathBuf,
    catalog: Catalog,
}

type Outcome = Result<(), CliError>;

fn op<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Op(e.to_string())
}

/// Runs one command line and returns the process exit code.
pub fn run<I, T>(args: I, io: &mut Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { io.stderr } else { io.stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let root = cli
        .home
        .clone()
        .or_else(|| (io.env)("RA_HOME").filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(workspace::default_root);
    let catalog = match &cli.templates {
        Some(dir) => match Catalog::with_overrides(dir) {
            Ok(c) => c,
            Err(e) => {
                let _ = writeln!(io.stderr, "error: {e}");
                return EXIT_FAILURE;
            }
        },
        None => Catalog::builtin().clone(),
    };
    let mut ctx = Ctx { io, root, catalog };
    match ctx.dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            ctx.report(&e);
            e.exit_code()
        }
    }
}

impl Ctx<'_, '_> {
    fn out(&mut self, text: &str) -> Outcome {
        self.io.stdout.write_all(text.as_bytes()).map_err(op)
    }

    fn warn(&mut self, text: &str) {
        let _ = writeln!(self.io.stderr, "{text}");
    }

    fn report(&mut self, e: &CliError) {
        match e {
            CliError::Usage(m) | CliError::Op(m) => self.warn(&format!("error: {m}")),
            CliError::Slot { scenario, error } => {
                self.warn(&format!("error: {error}"));
                if let Some(id) = scenario {
                    let schema = slot_schema(self.catalog.scenario(*id));
                    self.warn(&format!("\nslots for {}:\n{schema}", id.slug()));
                }
            }
        }
    }

    fn scenario(&self, slug: &str) -> Result<ScenarioId, CliError> {
        self.catalog
            .lookup(slug)
            .map(|s| s.id)
            .map_err(|e| CliError::Usage(unknown_scenario_message(&e)))
    }

    fn dispatch(&mut self, command: Command) -> Outcome {
        match command {
            Command::Tasks(cmd) => self.tasks(cmd),
            Command::Ws(cmd) => self.ws(cmd),
            Command::Prompt(args) => self.prompt(args),
            Command::Ingest(args) => self.ingest(args),
            Command::Edit(args) => self.edit(args),
            Command::Export(args) => self.export(args),
            Command::Chat(args) => self.chat(args),
            Command::Serve(args) => self.serve(args),
        }
    }

    fn tasks(&mut self, cmd: TasksCmd) -> Outcome {
        match cmd {
            TasksCmd::List { json } => {
                if json {
                    let text = serde_json::to_string_pretty(self.catalog.list_scenarios()).map_err(op)?;
                    return self.out(&format!("{text}\n"));
                }
                let mut text = String::new();
                for s in self.catalog.list_scenarios() {
                    text.push_str(&format!("{:<32} {:<4} {}\n", s.id.slug(), format!("{:?}", s.group), s.title));
                }
                self.out(&text)
            }
            TasksCmd::Show { scenario, json } => {
                let id = self.scenario(&scenario)?;
                let s = self.catalog.scenario(id).clone();
                if json {
                    let text = serde_json::to_string_pretty(&s).map_err(op)?;
                    return self.out(&format!("{text}\n"));
                }
                let provenance = serde_json::to_value(s.template.provenance).map_err(op)?;
                let text = format!(
                    "{}\n{} ({:?}), template {}\n\nslots:\n{}\n\ntemplate:\n{}\n",
                    s.id.slug(),
                    s.title,
                    s.group,
                    provenance.as_str().unwrap_or_default(),
                    slot_schema(&s),
                    s.template.text
                );
                self.out(&text)
            }
        }
    }

    fn ws(&mut self, cmd: WsCmd) -> Outcome {
        match cmd {
            WsCmd::New { id, problem } => {
                let ws = workspace::create(&self.root, &id, &problem)?;
                let path = workspace::workspace_path(&self.root, &ws.id);
                self.out(&format!("created workspace `{id}` at {}\n", path.display()))
            }
            WsCmd::Show { id, json } => {
                let ws = workspace::load_id(&self.root, &id)?;
                if json {
                    return self.out(&String::from_utf8_lossy(&ws.to_bytes()));
                }
                let text = summary(&ws);
                self.out(&text)
            }
            WsCmd::List { json } => {
                let ids = workspace::list(&self.root)?;
                if json {
                    let text = serde_json::to_string(&ids).map_err(op)?;
                    return self.out(&format!("{text}\n"));
                }
                let text: String = ids.iter().map(|id| format!("{id}\n")).collect();
                self.out(&text)
            }
            WsCmd::Delete { id } => {
                workspace::delete(&self.root, &id)?;
                self.out(&format!("deleted workspace `{id}`\n"))
            }
            WsCmd::SetPaper { id, label, title, doi, year } => {
                workspace::update(&self.root, &id, |ws| {
                    if ws.comparison.column_index(&label).is_none() {
                        return Err(CliError::Usage(format!("workspace `{id}` has no column `{label}`")));
                    }
                    ws.papers.insert(label.trim().to_string(), PaperMetadata { title, doi, year });
                    Ok(())
                })?;
                Ok(())
            }
        }
    }

    fn slot_inputs(&mut self, slots: SlotArgs, ws: Option<&Workspace>) -> Result<ScenarioInputs, CliError> {
        let contexts = inputs::contexts(&slots.contexts, &slots.labels, self.io.stdin)?;
        let mut dimensions = match &slots.dimensions {
            Some(path) => inputs::dimensions(path, self.io.stdin)?,
            None => Vec::new(),
        };
        if dimensions.is_empty() && !slots.select.is_empty() {
            if let Some(ws) = ws {
                dimensions = ws
                    .comparison
                    .dimensions()
                    .iter()
                    .map(|d| raforge_core::catalog::DimensionInput::new(&d.name, &d.definition))
                    .collect();
            }
        }
        let dimensions = inputs::select(dimensions, &slots.select)?;
        let call_objectives = match (&slots.call_objectives, &slots.call_objectives_file) {
            (Some(text), _) => Some(text.clone()),
            (None, Some(path)) => Some(inputs::read_text(path, self.io.stdin)?.trim_end().to_string()),
            (None, None) => None,
        };
        Ok(ScenarioInputs {
            problem: slots.problem,
            contexts,
            entities: slots.entities,
            dimensions,
            call_objectives,
            keywords: slots.keywords,
        })
    }

    fn prompt(&mut self, args: PromptArgs) -> Outcome {
        let id = self.scenario(&args.scenario)?;
        let slot_error = |e: CliError| match e {
            CliError::Slot { error, .. } => CliError::Slot { scenario: Some(id), error },
            other => other,
        };
        let prompt = match &args.ws {
            Some(ws_id) => {
                let current = workspace::load_id(&self.root, ws_id)?;
                let inputs = self.slot_inputs(args.slots, Some(&current))?;
                let catalog = self.catalog.clone();
                let (_, prompt) = workspace::update(&self.root, ws_id, |ws| {
                    ws.prompt(&catalog, id, &inputs).map_err(CliError::from)
                })
                .map_err(slot_error)?;
                prompt
            }
            None => {
                let inputs = self.slot_inputs(args.slots, None)?;
                self.catalog
                    .instantiate(id, &inputs)
                    .map_err(|error| CliError::Slot { scenario: Some(id), error })?
            }
        };
        if args.json {
            let v = serde_json::json!({ "scenario": id, "prompt": prompt });
            self.out(&format!("{v}\n"))?;
        } else {
            self.out(&format!("{prompt}\n"))?;
        }
        if args.copy {
            match clipboard::copy(&prompt) {
                Some(tool) => self.warn(&format!("copied to clipboard with {tool}")),
                None => self.warn("no clipboard tool found (tried wl-copy, xclip, pbcopy); prompt printed only"),
            }
        }
        Ok(())
    }

    fn ingest(&mut self, args: IngestArgs) -> Outcome {
        let text = inputs::read_text(&args.file, self.io.stdin)?;
        let (ws, outcome) = workspace::update(&self.root, &args.ws, |ws| {
            ws.ingest(&text, args.strategy).map_err(CliError::from)
        })?;
        for w in &outcome.parsed.warnings {
            self.warn(&format!("warning: {w}"));
        }
        if args.json {
            let text = serde_json::to_string_pretty(&outcome).map_err(op)?;
            return self.out(&format!("{text}\n"));
        }
        self.out(&format!(
            "ingested {} dimensions x {} columns; comparison now {} x {} ({})\n",
            outcome.parsed.dimensions.len(),
            outcome.parsed.columns.len(),
            ws.comparison.dimensions().len(),
            ws.comparison.columns().len(),
            outcome.snapshot_hash
        ))
    }

    fn edit(&mut self, args: EditArgs) -> Outcome {
        let commands = match args.op {
            EditOp::AddDimension { name, definition } => vec![EditCommand::AddDimension { name, definition }],
            EditOp::DeleteDimension { dimension } => vec![EditCommand::DeleteDimension { dimension }],
            EditOp::RenameDimension { dimension, to } => vec![EditCommand::RenameDimension { dimension, to }],
            EditOp::SetDefinition { dimension, definition } => {
                vec![EditCommand::SetDefinition { dimension, definition }]
            }
            EditOp::AddColumn { label, source_ref } => vec![EditCommand::AddColumn { label, source_ref }],
            EditOp::DeleteColumn { label } => vec![EditCommand::DeleteColumn { label }],
            EditOp::RenameColumn { label, to } => vec![EditCommand::RenameColumn { label, to }],
            EditOp::SetCell { dimension, column, value } => vec![EditCommand::SetCell { dimension, column, value }],
            EditOp::Batch { file } => {
                let text = inputs::read_text(&file, self.io.stdin)?;
                serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{file}: {e}")))?
            }
        };
        let (_, hash) = workspace::update(&self.root, &args.ws, |ws| {
            ws.apply_edits(&commands, args.base_hash.as_deref()).map_err(CliError::from)
        })?;
        self.out(&format!("{hash}\n"))
    }

    fn export(&mut self, args: ExportArgs) -> Outcome {
        let ws = workspace::load_id(&self.root, &args.ws)?;
        let metadata: BTreeMap<String, PaperMetadata> = match &args.metadata {
            Some(path) => {
                let text = inputs::read_text(path, self.io.stdin)?;
                serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{path}: {e}")))?
            }
            None => BTreeMap::new(),
        };
        let options = ExportOptions {
            empty_cell_policy: if args.na { EmptyCellPolicy::LiteralNa } else { EmptyCellPolicy::Empty },
            line_ending: if args.crlf { LineEnding::CRLF } else { LineEnding::LF },
            metadata,
        };
        let bytes = ws.export(args.flavor, &options)?;
        let target = args.output.unwrap_or_else(|| args.flavor.file_name(&ws.id));
        if target == "-" {
            return self.io.stdout.write_all(&bytes).map_err(op);
        }
        let path = Path::new(&target);
        workspace::atomic_write_with(path, |w| w.write_all(&bytes)).map_err(|e| op(format!("{target}: {e}")))?;
        self.warn(&format!("wrote {target}"));
        Ok(())
    }

    fn chat(&mut self, args: ChatArgs) -> Outcome {
        let id = self.scenario(&args.scenario)?;
        let config = GatewayConfig::from_env_with(|name| (self.io.env)(name)).map_err(op)?;
        let current = workspace::load_id(&self.root, &args.ws)?;
        let inputs = self.slot_inputs(args.slots, Some(&current))?;
        let catalog = self.catalog.clone();
        let (_, (reply, outcome)) = workspace::update(&self.root, &args.ws, |ws| {
            ws.chat(&catalog, id, &inputs, args.strategy, &config).map_err(CliError::from)
        })
        .map_err(|e| match e {
            CliError::Slot { error, .. } => CliError::Slot { scenario: Some(id), error },
            other => other,
        })?;
        self.out(&format!("{reply}\n"))?;
        match outcome {
            Some(o) => {
                for w in &o.parsed.warnings {
                    self.warn(&format!("warning: {w}"));
                }
                self.warn(&format!(
                    "ingested {} dimensions x {} columns ({})",
                    o.parsed.dimensions.len(),
                    o.parsed.columns.len(),
                    o.snapshot_hash
                ));
            }
            None => self.warn("the reply holds no usable table; nothing was ingested"),
        }
        Ok(())
    }

    fn serve(&mut self, args: ServeArgs) -> Outcome {
        let config = raforge_server::ServeConfig {
            host: args.host,
            port: args.port,
            root: self.root.clone(),
            catalog: self.catalog.clone(),
            static_dir: args.static_dir,
        };
        let runtime = tokio::runtime::Runtime::new().map_err(op)?;
        runtime.block_on(raforge_server::serve(config)).map_err(op)
    }
}

fn slot_schema(s: &TaskScenario) -> String {
    s.slots
        .iter()
        .map(|spec| format!("  {spec}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn summary(ws: &Workspace) -> String {
    let cmp = &ws.comparison;
    let mut text = format!(
        "workspace  {}\nproblem    {}\ncreated    {}\nmodified   {}\ntable      {} dimensions x {} columns\nsnapshot   {}\nlog        {} entries\n",
        ws.id,
        ws.problem,
        ws.created.to_rfc3339(),
        ws.modified.to_rfc3339(),
        cmp.dimensions().len(),
        cmp.columns().len(),
        cmp.snapshot_hash(),
        ws.log.len()
    );
    if !cmp.columns().is_empty() {
        let labels: Vec<&str> = cmp.columns().iter().map(|c| c.label.as_str()).collect();
        text.push_str(&format!("columns    {}\n", labels.join(", ")));
    }
    for d in cmp.dimensions() {
        let flag = if d.needs_curation { "  [needs curation]" } else { "" };
        text.push_str(&format!("  - {}{flag}\n", d.name));
    }
    text
}
