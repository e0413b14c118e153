//! Frozen expected outputs and the inputs that produce them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::catalog::{Catalog, ContextInput, DimensionInput, ScenarioId, ScenarioInputs};
use crate::comparison::{Comparison, MergeStrategy};
use crate::export::{export_orkg, ExportProfile, Flavor, OrkgSchema, PaperMetadata};
use crate::ingest::parse_response;
use crate::testing::corpus;

pub const GPT_PROBLEM: &str = "GPT family of large language models";
pub const GPT_FIXTURE: &str = "01-gpt-family";
pub const GPT_LABELS: [&str; 3] = ["GPT-1", "GPT-2", "GPT-3"];

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn read(rel: &str) -> String {
    let path = golden_dir().join(rel);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Path of one context file, e.g. `context_path("GPT-2")`.
pub fn context_path(label: &str) -> PathBuf {
    golden_dir().join(format!("contexts/{}.txt", label.to_lowercase()))
}

pub fn gpt_contexts() -> Vec<ContextInput> {
    GPT_LABELS
        .iter()
        .map(|label| {
            let body = fs::read_to_string(context_path(label)).expect("context file");
            ContextInput::labeled(*label, body.trim_end())
        })
        .collect()
}

pub fn gpt_dimensions() -> Vec<DimensionInput> {
    serde_json::from_str(&read("dimensions.json")).expect("dimensions.json")
}

pub fn call_objectives() -> String {
    read("call-objectives.txt").trim_end().to_string()
}

pub fn papers() -> BTreeMap<String, PaperMetadata> {
    serde_json::from_str(&read("orkg/papers.json")).expect("papers.json")
}

/// The scenarios with verbatim templates and their golden inputs.
pub fn template_cases() -> Vec<(ScenarioId, ScenarioInputs)> {
    let base = ScenarioInputs {
        problem: Some(GPT_PROBLEM.into()),
        ..Default::default()
    };
    vec![
        (
            ScenarioId::CompareContexts,
            ScenarioInputs {
                contexts: gpt_contexts(),
                ..base.clone()
            },
        ),
        (
            ScenarioId::ResearchIdeas,
            ScenarioInputs {
                dimensions: gpt_dimensions(),
                ..base.clone()
            },
        ),
        (
            ScenarioId::ProjectProposal,
            ScenarioInputs {
                call_objectives: Some(call_objectives()),
                ..base
            },
        ),
    ]
}

/// Golden text for `id`: the prompt followed by one newline.
pub fn template_golden(id: ScenarioId) -> String {
    read(&format!("templates/{}.txt", id.slug()))
}

pub fn check_templates(catalog: &Catalog) -> Vec<(ScenarioId, Result<(), String>)> {
    template_cases()
        .into_iter()
        .map(|(id, inputs)| {
            let outcome = match catalog.instantiate(id, &inputs) {
                Ok(prompt) if format!("{prompt}\n") == template_golden(id) => Ok(()),
                Ok(prompt) => Err(format!("prompt differs from golden:\n{prompt}")),
                Err(e) => Err(e.to_string()),
            };
            (id, outcome)
        })
        .collect()
}

/// The GPT fixture ingested into an empty comparison.
pub fn gpt_comparison() -> Comparison {
    let parsed = parse_response(&corpus::fixture(GPT_FIXTURE)).expect("GPT fixture parses");
    Comparison::new(GPT_PROBLEM)
        .merge_ingest(&parsed, MergeStrategy::Replace)
        .expect("GPT fixture merges")
}

pub fn orkg_golden() -> String {
    read("orkg/gpt-family.csv")
}

/// Exports the GPT fixture in the ORKG flavor and compares with the golden file.
pub fn check_orkg() -> Result<(), String> {
    let mut profile = ExportProfile::new(Flavor::OrkgImport);
    profile.metadata = papers();
    let bytes = export_orkg(&gpt_comparison(), &profile).map_err(|e| e.to_string())?;
    let text = String::from_utf8(bytes).map_err(|e| e.to_string())?;
    let reserved = OrkgSchema::bundled().header().join(",");
    if !text.starts_with(&format!("{reserved},")) {
        return Err(format!("header does not begin with `{reserved}`"));
    }
    if text != orkg_golden() {
        return Err(format!("export differs from golden:\n{text}"));
    }
    Ok(())
}
