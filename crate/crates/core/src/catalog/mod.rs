//! The eleven research-task scenarios and prompt instantiation.
//!
//! Template text ships as a plain-text bundle under `templates/v1/`, one file
//! per scenario, compiled into the binary. A user directory may override any
//! file by slug. Slot schemas live here in code.

pub mod template;

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use self::template::{Context, Item, Template, TemplateError};

/// Version tag of the bundled template set.
pub const TEMPLATE_BUNDLE_VERSION: &str = "v1";

macro_rules! bundled {
    ($($slug:literal),* $(,)?) => {
        &[$(($slug, include_str!(concat!("../../templates/v1/", $slug, ".txt")))),*]
    };
}

const BUNDLE: &[(&str, &str)] = bundled![
    "dimensions-for-problem",
    "compare-entities",
    "compare-contexts",
    "compare-contexts-by-dimensions",
    "define-dimensions",
    "blog-post",
    "preliminary-review",
    "research-ideas",
    "search-query",
    "user-stories",
    "project-proposal",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioId {
    DimensionsForProblem,
    CompareEntities,
    CompareContexts,
    CompareContextsByDimensions,
    DefineDimensions,
    BlogPost,
    PreliminaryReview,
    ResearchIdeas,
    SearchQuery,
    UserStories,
    ProjectProposal,
}

impl ScenarioId {
    /// All scenarios in catalog order: the five comparison scenarios first.
    pub const ALL: [ScenarioId; 11] = [
        ScenarioId::DimensionsForProblem,
        ScenarioId::CompareEntities,
        ScenarioId::CompareContexts,
        ScenarioId::CompareContextsByDimensions,
        ScenarioId::DefineDimensions,
        ScenarioId::BlogPost,
        ScenarioId::PreliminaryReview,
        ScenarioId::ResearchIdeas,
        ScenarioId::SearchQuery,
        ScenarioId::UserStories,
        ScenarioId::ProjectProposal,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            ScenarioId::DimensionsForProblem => "dimensions-for-problem",
            ScenarioId::CompareEntities => "compare-entities",
            ScenarioId::CompareContexts => "compare-contexts",
            ScenarioId::CompareContextsByDimensions => "compare-contexts-by-dimensions",
            ScenarioId::DefineDimensions => "define-dimensions",
            ScenarioId::BlogPost => "blog-post",
            ScenarioId::PreliminaryReview => "preliminary-review",
            ScenarioId::ResearchIdeas => "research-ideas",
            ScenarioId::SearchQuery => "search-query",
            ScenarioId::UserStories => "user-stories",
            ScenarioId::ProjectProposal => "project-proposal",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for ScenarioId {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.slug() == s)
            .ok_or_else(|| CatalogError::UnknownScenario(s.to_string()))
    }
}

/// Research task family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskGroup {
    /// Research comparisons.
    RC,
    /// Brainstorming ideas.
    BI,
    /// Grant applications.
    GA,
    /// Blog posts.
    BP,
    /// Preliminary reviews.
    PR,
    /// Keyword query synthesis.
    KQS,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotName {
    Problem,
    Contexts,
    Entities,
    Dimensions,
    CallObjectives,
    ContextSingle,
    Keywords,
}

impl SlotName {
    pub fn as_str(self) -> &'static str {
        match self {
            SlotName::Problem => "problem",
            SlotName::Contexts => "contexts",
            SlotName::Entities => "entities",
            SlotName::Dimensions => "dimensions",
            SlotName::CallObjectives => "call_objectives",
            SlotName::ContextSingle => "context_single",
            SlotName::Keywords => "keywords",
        }
    }

    fn parse(s: &str) -> Option<SlotName> {
        [
            SlotName::Problem,
            SlotName::Contexts,
            SlotName::Entities,
            SlotName::Dimensions,
            SlotName::CallObjectives,
            SlotName::ContextSingle,
            SlotName::Keywords,
        ]
        .into_iter()
        .find(|n| n.as_str() == s)
    }

    /// Fields available inside `{{#each}}` for this slot, or `None` if the slot
    /// cannot be iterated.
    fn item_fields(self) -> Option<&'static [&'static str]> {
        match self {
            SlotName::Contexts => Some(&["label", "body", "index"]),
            SlotName::Dimensions => Some(&["name", "definition", "index"]),
            SlotName::Entities | SlotName::Keywords => Some(&["value", "index"]),
            _ => None,
        }
    }
}

impl fmt::Display for SlotName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Multiplicity {
    One,
    Many,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotSpec {
    pub name: SlotName,
    pub required: bool,
    pub multiplicity: Multiplicity,
    pub min_count: u32,
}

impl SlotSpec {
    const fn one(name: SlotName, required: bool) -> Self {
        SlotSpec {
            name,
            required,
            multiplicity: Multiplicity::One,
            min_count: required as u32,
        }
    }

    const fn many(name: SlotName, min_count: u32) -> Self {
        SlotSpec {
            name,
            required: min_count > 0,
            multiplicity: Multiplicity::Many,
            min_count,
        }
    }
}

impl fmt::Display for SlotSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let need = if self.required { "required" } else { "optional" };
        match self.multiplicity {
            Multiplicity::One => write!(f, "{} ({need})", self.name),
            Multiplicity::Many => write!(f, "{} ({need}, min {})", self.name, self.min_count),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    PaperVerbatim,
    Authored,
}

#[derive(Debug, Clone, Serialize)]
pub struct PromptTemplate {
    pub text: String,
    pub provenance: Provenance,
    #[serde(skip)]
    parsed: Template,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskScenario {
    pub id: ScenarioId,
    pub group: TaskGroup,
    pub title: &'static str,
    pub template: PromptTemplate,
    pub slots: Vec<SlotSpec>,
}

impl TaskScenario {
    pub fn slot(&self, name: SlotName) -> Option<&SlotSpec> {
        self.slots.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub body: String,
    /// Where the body came from, e.g. a file name. Not rendered.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl ContextInput {
    pub fn new(body: impl Into<String>) -> Self {
        ContextInput {
            label: None,
            body: body.into(),
            source: None,
        }
    }

    pub fn labeled(label: impl Into<String>, body: impl Into<String>) -> Self {
        ContextInput {
            label: Some(label.into()),
            body: body.into(),
            source: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionInput {
    pub name: String,
    #[serde(default)]
    pub definition: String,
}

impl DimensionInput {
    pub fn new(name: impl Into<String>, definition: impl Into<String>) -> Self {
        DimensionInput {
            name: name.into(),
            definition: definition.into(),
        }
    }
}

/// User-supplied values for a scenario's slots.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioInputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    pub contexts: Vec<ContextInput>,
    pub entities: Vec<String>,
    pub dimensions: Vec<DimensionInput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub call_objectives: Option<String>,
    pub keywords: Vec<String>,
}

impl ScenarioInputs {
    fn count(&self, slot: SlotName) -> usize {
        match slot {
            SlotName::Problem => self.problem.is_some() as usize,
            SlotName::CallObjectives => self.call_objectives.is_some() as usize,
            SlotName::Contexts | SlotName::ContextSingle => self.contexts.len(),
            SlotName::Entities => self.entities.len(),
            SlotName::Dimensions => self.dimensions.len(),
            SlotName::Keywords => self.keywords.len(),
        }
    }

    fn first_empty(&self, slot: SlotName) -> bool {
        let blank = |s: &str| s.trim().is_empty();
        match slot {
            SlotName::Problem => self.problem.as_deref().is_some_and(blank),
            SlotName::CallObjectives => self.call_objectives.as_deref().is_some_and(blank),
            SlotName::Contexts | SlotName::ContextSingle => self
                .contexts
                .iter()
                .any(|c| blank(&c.body) || c.label.as_deref().is_some_and(blank)),
            SlotName::Entities => self.entities.iter().any(|s| blank(s)),
            SlotName::Dimensions => self.dimensions.iter().any(|d| blank(&d.name)),
            SlotName::Keywords => self.keywords.iter().any(|s| blank(s)),
        }
    }

    /// The label shown for context `index`: the user's, or `Context N`.
    pub fn context_label(&self, index: usize) -> String {
        self.contexts[index]
            .label
            .clone()
            .unwrap_or_else(|| format!("Context {}", index + 1))
    }

    fn render_contexts(&self, limit: usize) -> String {
        self.contexts
            .iter()
            .take(limit)
            .enumerate()
            .map(|(i, c)| format!("{}: {}", self.context_label(i), c.body))
            .collect::<Vec<_>>()
            .join("\n\n")
    }
}

/// Renders `[(name, definition)]` as `{"name": "definition", ...}` in input order.
pub fn render_dimension_dictionary(dimensions: &[DimensionInput]) -> String {
    let body = dimensions
        .iter()
        .map(|d| format!("\"{}\": \"{}\"", d.name, d.definition))
        .collect::<Vec<_>>()
        .join(", ");
    format!("{{{body}}}")
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("template for `{scenario}` is malformed: {source}")]
    Template {
        scenario: ScenarioId,
        #[source]
        source: TemplateError,
    },
    #[error("template for `{scenario}` has a bad header: {detail}")]
    Header { scenario: ScenarioId, detail: String },
    #[error("template for `{scenario}` references undeclared slot `{slot}`")]
    UndeclaredSlot { scenario: ScenarioId, slot: String },
    #[error("template for `{scenario}` never uses declared slot `{slot}`")]
    UnusedSlot { scenario: ScenarioId, slot: SlotName },
    #[error("template for `{scenario}` uses `{field}` on `{slot}`, which has no such item field")]
    UnknownField {
        scenario: ScenarioId,
        slot: String,
        field: String,
    },
    #[error("cannot read template override {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum InputError {
    #[error("missing required slot `{slot}`")]
    MissingSlot { slot: SlotName },
    #[error("slot `{slot}` needs at least {need} value(s), got {got}")]
    TooFewValues { slot: SlotName, got: usize, need: usize },
    #[error("slot `{slot}` takes at most {max} value(s), got {got}")]
    TooManyValues { slot: SlotName, got: usize, max: usize },
    #[error("slot `{slot}` has an empty value")]
    EmptyInput { slot: SlotName },
}

impl InputError {
    pub fn slot(&self) -> SlotName {
        match self {
            InputError::MissingSlot { slot }
            | InputError::TooFewValues { slot, .. }
            | InputError::TooManyValues { slot, .. }
            | InputError::EmptyInput { slot } => *slot,
        }
    }
}

/// The immutable scenario catalog.
#[derive(Debug, Clone)]
pub struct Catalog {
    scenarios: Vec<TaskScenario>,
}

fn scenario_shape(id: ScenarioId) -> (TaskGroup, &'static str, Vec<SlotSpec>) {
    use SlotName::*;
    let problem = SlotSpec::one(Problem, true);
    let dims = SlotSpec::many(Dimensions, 1);
    match id {
        ScenarioId::DimensionsForProblem => (
            TaskGroup::RC,
            "Get research dimensions for a research problem",
            vec![problem, SlotSpec::many(Contexts, 0)],
        ),
        ScenarioId::CompareEntities => (
            TaskGroup::RC,
            "Compare entities for a research problem",
            vec![problem, SlotSpec::many(Entities, 2)],
        ),
        ScenarioId::CompareContexts => (
            TaskGroup::RC,
            "Compare research from scientific contexts",
            vec![problem, SlotSpec::many(Contexts, 2)],
        ),
        ScenarioId::CompareContextsByDimensions => (
            TaskGroup::RC,
            "Compare scientific contexts based on research dimensions",
            vec![problem, SlotSpec::many(Contexts, 2), dims],
        ),
        ScenarioId::DefineDimensions => (
            TaskGroup::RC,
            "Create definitions for selected research dimensions",
            vec![problem, dims, SlotSpec::many(Contexts, 0)],
        ),
        ScenarioId::BlogPost => (
            TaskGroup::BP,
            "Write a blog about selected research dimensions",
            vec![problem, dims],
        ),
        ScenarioId::PreliminaryReview => (
            TaskGroup::PR,
            "Write a scientific review from a context",
            vec![
                SlotSpec::one(ContextSingle, true),
                SlotSpec::one(Problem, false),
                SlotSpec::many(Dimensions, 0),
            ],
        ),
        ScenarioId::ResearchIdeas => (
            TaskGroup::BI,
            "Get ideas for research using selected research dimensions",
            vec![problem, dims],
        ),
        ScenarioId::SearchQuery => (
            TaskGroup::KQS,
            "Get a literature search query based on the selected research dimensions",
            vec![problem, dims, SlotSpec::many(Keywords, 0)],
        ),
        ScenarioId::UserStories => (
            TaskGroup::BI,
            "Create user stories and acceptance criteria from scientific contexts",
            vec![SlotSpec::many(Contexts, 1), SlotSpec::one(Problem, false)],
        ),
        ScenarioId::ProjectProposal => (
            TaskGroup::GA,
            "Write a basic project proposal",
            vec![problem, SlotSpec::one(CallObjectives, true)],
        ),
    }
}

/// Splits a bundle file into its header provenance and template body.
fn split_template_file(
    id: ScenarioId,
    raw: &str,
) -> Result<(Option<Provenance>, String), CatalogError> {
    let raw = raw.strip_prefix('\u{feff}').unwrap_or(raw);
    let bad = |detail: &str| CatalogError::Header {
        scenario: id,
        detail: detail.to_string(),
    };
    let mut provenance = None;
    let mut offset = 0;
    let mut found = false;
    for line in raw.split_inclusive('\n') {
        offset += line.len();
        let line = line.trim_end_matches(['\n', '\r']);
        if line == "---" {
            found = true;
            break;
        }
        let (key, value) = line.split_once(':').ok_or_else(|| bad(line))?;
        match (key.trim(), value.trim()) {
            ("provenance", "paper-verbatim") => provenance = Some(Provenance::PaperVerbatim),
            ("provenance", "authored") => provenance = Some(Provenance::Authored),
            _ => return Err(bad(line)),
        }
    }
    if !found {
        return Err(bad("missing `---` separator"));
    }
    let body = &raw[offset..];
    let body = body
        .strip_suffix("\r\n")
        .or_else(|| body.strip_suffix('\n'))
        .unwrap_or(body);
    Ok((provenance, body.to_string()))
}

fn build_scenario(
    id: ScenarioId,
    text: String,
    provenance: Provenance,
) -> Result<TaskScenario, CatalogError> {
    let (group, title, slots) = scenario_shape(id);
    let parsed = Template::parse(&text).map_err(|source| CatalogError::Template {
        scenario: id,
        source,
    })?;
    let referenced = parsed.referenced_slots();
    let mut used = BTreeSet::new();
    for name in &referenced {
        let slot = SlotName::parse(name)
            .filter(|s| slots.iter().any(|spec| spec.name == *s))
            .ok_or_else(|| CatalogError::UndeclaredSlot {
                scenario: id,
                slot: name.clone(),
            })?;
        used.insert(slot);
    }
    for (slot, field) in parsed.item_fields() {
        let ok = SlotName::parse(&slot)
            .and_then(SlotName::item_fields)
            .is_some_and(|fields| fields.contains(&field.as_str()));
        if !ok {
            return Err(CatalogError::UnknownField {
                scenario: id,
                slot,
                field,
            });
        }
    }
    if let Some(spec) = slots.iter().find(|s| !used.contains(&s.name)) {
        return Err(CatalogError::UnusedSlot {
            scenario: id,
            slot: spec.name,
        });
    }
    Ok(TaskScenario {
        id,
        group,
        title,
        template: PromptTemplate {
            text,
            provenance,
            parsed,
        },
        slots,
    })
}

impl Catalog {
    /// The bundled catalog. Panics only if the compiled-in bundle is broken,
    /// which the unit tests rule out.
    pub fn builtin() -> &'static Catalog {
        static BUILTIN: OnceLock<Catalog> = OnceLock::new();
        BUILTIN.get_or_init(|| Catalog::from_bundle().expect("bundled templates are valid"))
    }

    fn from_bundle() -> Result<Catalog, CatalogError> {
        let scenarios = ScenarioId::ALL
            .into_iter()
            .map(|id| {
                let raw = BUNDLE
                    .iter()
                    .find(|(slug, _)| *slug == id.slug())
                    .map(|(_, raw)| *raw)
                    .expect("every scenario has a bundled template");
                let (provenance, text) = split_template_file(id, raw)?;
                let provenance = provenance.ok_or_else(|| CatalogError::Header {
                    scenario: id,
                    detail: "bundled template lacks a provenance line".into(),
                })?;
                build_scenario(id, text, provenance)
            })
            .collect::<Result<_, _>>()?;
        Ok(Catalog { scenarios })
    }

    /// The bundled catalog with `<dir>/<slug>.txt` files replacing the
    /// matching templates. Overrides are always tagged as authored.
    pub fn with_overrides(dir: &Path) -> Result<Catalog, CatalogError> {
        let mut catalog = Catalog::builtin().clone();
        for scenario in &mut catalog.scenarios {
            let path = dir.join(format!("{}.txt", scenario.id.slug()));
            let raw = match std::fs::read_to_string(&path) {
                Ok(raw) => raw,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => continue,
                Err(source) => {
                    return Err(CatalogError::Io {
                        path: path.display().to_string(),
                        source,
                    })
                }
            };
            let (_, text) = split_template_file(scenario.id, &raw)?;
            *scenario = build_scenario(scenario.id, text, Provenance::Authored)?;
        }
        Ok(catalog)
    }

    pub fn list_scenarios(&self) -> &[TaskScenario] {
        &self.scenarios
    }

    pub fn scenario(&self, id: ScenarioId) -> &TaskScenario {
        self.scenarios
            .iter()
            .find(|s| s.id == id)
            .expect("catalog holds every scenario id")
    }

    /// Looks a scenario up by slug.
    pub fn lookup(&self, slug: &str) -> Result<&TaskScenario, CatalogError> {
        Ok(self.scenario(slug.parse()?))
    }

    pub fn required_slots(&self, slug: &str) -> Result<&[SlotSpec], CatalogError> {
        Ok(&self.lookup(slug)?.slots)
    }

    /// Checks `inputs` against the scenario's slot schema.
    pub fn validate(&self, id: ScenarioId, inputs: &ScenarioInputs) -> Result<(), InputError> {
        for spec in &self.scenario(id).slots {
            let got = inputs.count(spec.name);
            let need = spec.min_count as usize;
            if got == 0 && spec.required && spec.multiplicity == Multiplicity::One {
                return Err(InputError::MissingSlot { slot: spec.name });
            }
            if got < need {
                return Err(InputError::TooFewValues {
                    slot: spec.name,
                    got,
                    need,
                });
            }
            if spec.multiplicity == Multiplicity::One && got > 1 {
                return Err(InputError::TooManyValues {
                    slot: spec.name,
                    got,
                    max: 1,
                });
            }
            if inputs.first_empty(spec.name) {
                return Err(InputError::EmptyInput { slot: spec.name });
            }
        }
        Ok(())
    }

    /// Renders the scenario's prompt. Deterministic in `(id, inputs)`.
    pub fn instantiate(&self, id: ScenarioId, inputs: &ScenarioInputs) -> Result<String, InputError> {
        self.validate(id, inputs)?;
        let scenario = self.scenario(id);
        let ctx = RenderCtx { inputs };
        let text = scenario
            .template
            .parsed
            .render(&ctx)
            .expect("templates are checked against their slot schema at load");
        Ok(text)
    }
}

struct RenderCtx<'a> {
    inputs: &'a ScenarioInputs,
}

struct ContextItem {
    label: String,
    body: String,
}

impl Item for ContextItem {
    fn field(&self, name: &str, index: usize) -> Option<String> {
        match name {
            "label" => Some(self.label.clone()),
            "body" => Some(self.body.clone()),
            "index" => Some(index.to_string()),
            _ => None,
        }
    }
}

impl Item for DimensionInput {
    fn field(&self, name: &str, index: usize) -> Option<String> {
        match name {
            "name" => Some(self.name.clone()),
            "definition" => Some(self.definition.clone()),
            "index" => Some(index.to_string()),
            _ => None,
        }
    }
}

struct ValueItem<'a>(&'a str);

impl Item for ValueItem<'_> {
    fn field(&self, name: &str, index: usize) -> Option<String> {
        match name {
            "value" => Some(self.0.to_string()),
            "index" => Some(index.to_string()),
            _ => None,
        }
    }
}

impl Context for RenderCtx<'_> {
    fn scalar(&self, slot: &str) -> Option<String> {
        let inputs = self.inputs;
        match SlotName::parse(slot)? {
            SlotName::Problem => inputs.problem.clone(),
            SlotName::CallObjectives => inputs.call_objectives.clone(),
            SlotName::Contexts => Some(inputs.render_contexts(usize::MAX)),
            SlotName::ContextSingle => Some(inputs.render_contexts(1)),
            SlotName::Dimensions => Some(render_dimension_dictionary(&inputs.dimensions)),
            SlotName::Entities => Some(inputs.entities.join(", ")),
            SlotName::Keywords => Some(inputs.keywords.join(", ")),
        }
    }

    fn present(&self, slot: &str) -> bool {
        SlotName::parse(slot).is_some_and(|s| self.inputs.count(s) > 0)
    }

    fn items(&self, slot: &str) -> Vec<Box<dyn Item + '_>> {
        let inputs = self.inputs;
        match SlotName::parse(slot) {
            Some(SlotName::Contexts) => (0..inputs.contexts.len())
                .map(|i| {
                    Box::new(ContextItem {
                        label: inputs.context_label(i),
                        body: inputs.contexts[i].body.clone(),
                    }) as Box<dyn Item>
                })
                .collect(),
            Some(SlotName::Dimensions) => inputs
                .dimensions
                .iter()
                .map(|d| Box::new(d.clone()) as Box<dyn Item>)
                .collect(),
            Some(SlotName::Entities) => inputs
                .entities
                .iter()
                .map(|v| Box::new(ValueItem(v)) as Box<dyn Item>)
                .collect(),
            Some(SlotName::Keywords) => inputs
                .keywords
                .iter()
                .map(|v| Box::new(ValueItem(v)) as Box<dyn Item>)
                .collect(),
            _ => Vec::new(),
        }
    }
}
