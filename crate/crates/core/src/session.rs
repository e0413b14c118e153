//! Workflow steps on a workspace: prompt, ingest, edit, export.
//!
//! The CLI and the HTTP service both drive workspaces through these
//! methods, so the same sequence of steps yields the same comparison on
//! either surface.

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{
    Catalog, CatalogError, ContextInput, DimensionInput, InputError, ScenarioId, ScenarioInputs,
    SlotName,
};
use crate::comparison::{ComparisonError, EditCommand, MergeStrategy};
use crate::export::{self, EmptyCellPolicy, ExportError, ExportProfile, Flavor, LineEnding};
use crate::gateway::{self, GatewayConfig, GatewayError};
use crate::ingest::{self, IngestError, ParsedIngest};
use crate::workspace::{now, ContextDoc, EntryKind, ProvenanceEntry, StoreError, Workspace};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Merge(ComparisonError),
    #[error("edit {index} failed: {error}")]
    Edit {
        index: usize,
        error: ComparisonError,
    },
    #[error("stale snapshot: edits were based on {expected} but the workspace is at {actual}")]
    Conflict { expected: String, actual: String },
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

/// Result of ingesting one response.
#[derive(Debug, Clone, Serialize)]
pub struct IngestOutcome {
    pub parsed: ParsedIngest,
    pub snapshot_hash: String,
}

/// Knobs for [`Workspace::export`] beyond the flavor.
#[derive(Debug, Clone, Default)]
pub struct ExportOptions {
    pub empty_cell_policy: EmptyCellPolicy,
    pub line_ending: LineEnding,
    /// Merged over the workspace's stored paper metadata.
    pub metadata: std::collections::BTreeMap<String, export::PaperMetadata>,
}

impl Workspace {
    /// Fills slots the caller left empty from workspace state: the research
    /// problem, the stored contexts and the comparison's dimensions.
    pub fn complete_inputs(&self, catalog: &Catalog, scenario: ScenarioId, inputs: &ScenarioInputs) -> ScenarioInputs {
        let spec = catalog.scenario(scenario);
        let mut out = inputs.clone();
        if out.problem.is_none() && spec.slot(SlotName::Problem).is_some() && !self.problem.trim().is_empty() {
            out.problem = Some(self.problem.clone());
        }
        if out.contexts.is_empty() {
            let take = if spec.slot(SlotName::ContextSingle).is_some() {
                1
            } else if spec.slot(SlotName::Contexts).is_some() {
                usize::MAX
            } else {
                0
            };
            out.contexts = self
                .contexts
                .iter()
                .take(take)
                .map(|c| ContextInput {
                    label: Some(c.label.clone()),
                    body: c.body.clone(),
                    source: c.source.clone(),
                })
                .collect();
        }
        if out.dimensions.is_empty() && spec.slot(SlotName::Dimensions).is_some() {
            out.dimensions = self
                .comparison
                .dimensions()
                .iter()
                .map(|d| DimensionInput::new(&d.name, &d.definition))
                .collect();
        }
        out
    }

    fn remember_inputs(&mut self, inputs: &ScenarioInputs) {
        if self.problem.trim().is_empty() {
            if let Some(p) = &inputs.problem {
                self.problem = p.clone();
                self.comparison.set_problem(p.clone());
            }
        }
        if !inputs.contexts.is_empty() {
            self.contexts = (0..inputs.contexts.len())
                .map(|i| ContextDoc {
                    label: inputs.context_label(i),
                    body: inputs.contexts[i].body.clone(),
                    source: inputs.contexts[i].source.clone(),
                })
                .collect();
        }
    }

    /// Instantiates a prompt and records it in the provenance log.
    pub fn prompt(
        &mut self,
        catalog: &Catalog,
        scenario: ScenarioId,
        inputs: &ScenarioInputs,
    ) -> Result<String, SessionError> {
        let inputs = self.complete_inputs(catalog, scenario, inputs);
        let text = catalog.instantiate(scenario, &inputs)?;
        self.remember_inputs(&inputs);
        let hash = self.comparison.snapshot_hash();
        self.log.push(ProvenanceEntry {
            timestamp: now(),
            kind: EntryKind::Prompt,
            scenario: Some(scenario),
            prompt_text: Some(text.clone()),
            response_text: None,
            ingest_warnings: Vec::new(),
            edits: Vec::new(),
            pre_snapshot: hash.clone(),
            post_snapshot: hash,
            transport: None,
        });
        Ok(text)
    }

    fn last_prompt(&self) -> Option<&ProvenanceEntry> {
        self.log
            .iter()
            .rev()
            .find(|e| matches!(e.kind, EntryKind::Prompt | EntryKind::Chat))
    }

    fn merge_response(&mut self, raw: &str, strategy: MergeStrategy) -> Result<(ParsedIngest, String, String), SessionError> {
        let parsed = ingest::parse_response(raw)?;
        let pre = self.comparison.snapshot_hash();
        let mut next = self
            .comparison
            .merge_ingest(&parsed, strategy)
            .map_err(SessionError::Merge)?;
        for (i, column) in next.columns().to_vec().iter().enumerate() {
            if column.source_ref.is_none() {
                if let Some(ctx) = self.contexts.iter().find(|c| c.label == column.label) {
                    next.set_source_ref(i, ctx.source.clone());
                }
            }
        }
        self.comparison = next;
        let post = self.comparison.snapshot_hash();
        Ok((parsed, pre, post))
    }

    /// Parses a pasted response and merges it into the comparison.
    pub fn ingest(&mut self, raw: &str, strategy: MergeStrategy) -> Result<IngestOutcome, SessionError> {
        let (parsed, pre, post) = self.merge_response(raw, strategy)?;
        let (scenario, prompt_text) = self
            .last_prompt()
            .map(|e| (e.scenario, e.prompt_text.clone()))
            .unwrap_or((None, None));
        self.log.push(ProvenanceEntry {
            timestamp: now(),
            kind: EntryKind::Ingest,
            scenario,
            prompt_text,
            response_text: Some(raw.to_string()),
            ingest_warnings: parsed.warnings.clone(),
            edits: Vec::new(),
            pre_snapshot: pre,
            post_snapshot: post.clone(),
            transport: None,
        });
        Ok(IngestOutcome {
            parsed,
            snapshot_hash: post,
        })
    }

    /// Prompt, send through the gateway, and ingest the reply when it holds
    /// a usable table. Returns the reply text and the ingest result, if any.
    pub fn chat(
        &mut self,
        catalog: &Catalog,
        scenario: ScenarioId,
        inputs: &ScenarioInputs,
        strategy: MergeStrategy,
        config: &GatewayConfig,
    ) -> Result<(String, Option<IngestOutcome>), SessionError> {
        let inputs = self.complete_inputs(catalog, scenario, inputs);
        let prompt = catalog.instantiate(scenario, &inputs)?;
        let completion = gateway::complete(&prompt, config)?;
        self.remember_inputs(&inputs);
        let pre = self.comparison.snapshot_hash();
        let outcome = match self.merge_response(&completion.text, strategy) {
            Ok((parsed, _, post)) => Some(IngestOutcome {
                parsed,
                snapshot_hash: post,
            }),
            Err(SessionError::Ingest(IngestError::NoUsableTable)) => None,
            Err(e) => return Err(e),
        };
        self.log.push(ProvenanceEntry {
            timestamp: now(),
            kind: EntryKind::Chat,
            scenario: Some(scenario),
            prompt_text: Some(prompt),
            response_text: Some(completion.text.clone()),
            ingest_warnings: outcome
                .as_ref()
                .map(|o| o.parsed.warnings.clone())
                .unwrap_or_default(),
            edits: Vec::new(),
            pre_snapshot: pre,
            post_snapshot: self.comparison.snapshot_hash(),
            transport: Some(completion.transport),
        });
        Ok((completion.text, outcome))
    }

    /// Applies an edit batch atomically. With `base_hash`, the batch is
    /// refused unless the comparison is still at that snapshot.
    pub fn apply_edits(&mut self, cmds: &[EditCommand], base_hash: Option<&str>) -> Result<String, SessionError> {
        let pre = self.comparison.snapshot_hash();
        if let Some(expected) = base_hash {
            if expected != pre {
                return Err(SessionError::Conflict {
                    expected: expected.to_string(),
                    actual: pre,
                });
            }
        }
        if cmds.is_empty() {
            return Ok(pre);
        }
        let next = self
            .comparison
            .apply_edits(cmds)
            .map_err(|(index, error)| SessionError::Edit { index, error })?;
        self.comparison = next;
        for cmd in cmds {
            if let EditCommand::RenameColumn { label, to } = cmd {
                if let Some(meta) = self.papers.remove(label.trim()) {
                    self.papers.insert(to.trim().to_string(), meta);
                }
            }
        }
        let post = self.comparison.snapshot_hash();
        self.log.push(ProvenanceEntry {
            timestamp: now(),
            kind: EntryKind::Edit,
            scenario: None,
            prompt_text: None,
            response_text: None,
            ingest_warnings: Vec::new(),
            edits: cmds.to_vec(),
            pre_snapshot: pre,
            post_snapshot: post.clone(),
            transport: None,
        });
        Ok(post)
    }

    pub fn export_profile(&self, flavor: Flavor, options: &ExportOptions) -> ExportProfile {
        let mut metadata = self.papers.clone();
        metadata.extend(options.metadata.clone());
        ExportProfile {
            flavor,
            empty_cell_policy: options.empty_cell_policy,
            line_ending: options.line_ending,
            metadata,
        }
    }

    pub fn export(&self, flavor: Flavor, options: &ExportOptions) -> Result<Vec<u8>, SessionError> {
        Ok(export::export(&self.comparison, &self.export_profile(flavor, options))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RESPONSE: &str = "| Dimension | GPT-1 | GPT-2 |\n|---|---|---|\n| model size | 117M | 1.5B |\n| optimizer | Adam | Adam |\n\n| Dimension | Description |\n|---|---|\n| model size | parameters |\n| optimizer | training algorithm |\n";

    fn ws() -> Workspace {
        Workspace::new("gpt", "GPT family of large language models").unwrap()
    }

    #[test]
    fn prompt_uses_workspace_problem_and_logs() {
        let mut w = ws();
        let inputs = ScenarioInputs {
            contexts: vec![ContextInput::labeled("GPT-1", "a"), ContextInput::labeled("GPT-2", "b")],
            ..Default::default()
        };
        let text = w
            .prompt(Catalog::builtin(), ScenarioId::CompareContexts, &inputs)
            .unwrap();
        assert!(text.contains("\"GPT family of large language models\""));
        assert_eq!(w.contexts.len(), 2);
        assert_eq!(w.log.len(), 1);
        assert_eq!(w.log[0].kind, EntryKind::Prompt);
    }

    #[test]
    fn ingest_then_reuse_dimensions() {
        let mut w = ws();
        let out = w.ingest(RESPONSE, MergeStrategy::Replace).unwrap();
        assert_eq!(out.snapshot_hash, w.comparison.snapshot_hash());
        assert_eq!(w.comparison.dimensions().len(), 2);
        let ideas = w
            .prompt(Catalog::builtin(), ScenarioId::ResearchIdeas, &ScenarioInputs::default())
            .unwrap();
        assert!(ideas.contains(r#"{"model size": "parameters", "optimizer": "training algorithm"}"#));
        assert_eq!(w.log[0].kind, EntryKind::Ingest);
        assert_eq!(w.log[0].prompt_text, None);
    }

    #[test]
    fn stale_edits_conflict() {
        let mut w = ws();
        w.ingest(RESPONSE, MergeStrategy::Replace).unwrap();
        let base = w.comparison.snapshot_hash();
        let del = [EditCommand::DeleteDimension {
            dimension: "optimizer".into(),
        }];
        w.apply_edits(&del, Some(&base)).unwrap();
        let before = w.comparison.clone();
        assert!(matches!(
            w.apply_edits(&del, Some(&base)),
            Err(SessionError::Conflict { .. })
        ));
        assert_eq!(w.comparison, before);
        assert!(matches!(
            w.apply_edits(&del, None),
            Err(SessionError::Edit { index: 0, .. })
        ));
        let entries = w.log.len();
        w.apply_edits(&[], None).unwrap();
        assert_eq!(w.log.len(), entries);
    }

    #[test]
    fn rename_column_moves_paper_metadata() {
        let mut w = ws();
        w.ingest(RESPONSE, MergeStrategy::Replace).unwrap();
        w.papers.insert(
            "GPT-1".into(),
            export::PaperMetadata {
                title: "Improving Language Understanding".into(),
                ..Default::default()
            },
        );
        w.apply_edits(
            &[EditCommand::RenameColumn {
                label: "GPT-1".into(),
                to: "GPT 1".into(),
            }],
            None,
        )
        .unwrap();
        assert!(w.papers.contains_key("GPT 1"));
        assert!(matches!(
            w.export(Flavor::OrkgImport, &ExportOptions::default()),
            Err(SessionError::Export(ExportError::MissingMetadata(l))) if l == "GPT-2"
        ));
    }
}
