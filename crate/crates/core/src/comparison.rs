//! The research-comparison matrix and its post-editing operations.
//!
//! A [`Comparison`] holds ordered columns (papers, contexts or entities),
//! ordered dimensions with their definitions, and one cell per
//! dimension/column pair. Definitions live on the dimension itself, so the
//! matrix and the definitions registry cannot drift apart. Every operation
//! returns a new value and either applies fully or not at all.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ingest::{validate_dimension_name, ParsedIngest};

/// Identity key for a dimension name: whitespace collapsed, case folded.
pub fn dimension_key(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Llm,
    User,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimension {
    pub name: String,
    pub key: String,
    pub definition: String,
    pub origin: Origin,
    /// Set when the name breaks the 1-3 token rule and awaits curation.
    #[serde(default)]
    pub needs_curation: bool,
}

impl Dimension {
    pub fn new(name: &str, definition: &str, origin: Origin) -> Self {
        let name = name.trim().to_string();
        Dimension {
            key: dimension_key(&name),
            needs_curation: !validate_dimension_name(&name).is_valid(),
            name,
            definition: definition.to_string(),
            origin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonColumn {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_ref: Option<String>,
}

impl ComparisonColumn {
    pub fn new(label: &str) -> Self {
        ComparisonColumn {
            label: label.trim().to_string(),
            source_ref: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "error", content = "subject", rename_all = "snake_case")]
pub enum ComparisonError {
    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("a dimension with key `{0}` already exists")]
    DuplicateKey(String),
    #[error("a column labelled `{0}` already exists")]
    DuplicateLabel(String),
    #[error("column `{0}` is already present; extend cannot add it again")]
    ColumnLabelClash(String),
    #[error("`{0}` must not be empty")]
    EmptyIdentity(&'static str),
    #[error("invalid comparison: {0}")]
    Invalid(String),
}

/// One post-editing step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EditCommand {
    AddDimension {
        name: String,
        #[serde(default)]
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
        #[serde(default, skip_serializing_if = "Option::is_none")]
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
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeStrategy {
    #[default]
    Replace,
    Extend,
}

impl std::str::FromStr for MergeStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "replace" => Ok(MergeStrategy::Replace),
            "extend" => Ok(MergeStrategy::Extend),
            other => Err(format!("unknown merge strategy `{other}`")),
        }
    }
}

/// Deterministic, order-preserving byte form of a comparison.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalForm(Vec<u8>);

impl CanonicalForm {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// Lowercase hex SHA-256 of the canonical bytes.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(&self.0))
    }
}

#[derive(Serialize, Deserialize)]
struct ComparisonRepr {
    problem: String,
    columns: Vec<ComparisonColumn>,
    dimensions: Vec<Dimension>,
    cells: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "ComparisonRepr", into = "ComparisonRepr")]
pub struct Comparison {
    problem: String,
    columns: Vec<ComparisonColumn>,
    dimensions: Vec<Dimension>,
    /// `cells[d][c]` is the value of dimension `d` for column `c`.
    cells: Vec<Vec<String>>,
}

impl TryFrom<ComparisonRepr> for Comparison {
    type Error = ComparisonError;

    fn try_from(r: ComparisonRepr) -> Result<Self, Self::Error> {
        let c = Comparison {
            problem: r.problem,
            columns: r.columns,
            dimensions: r.dimensions,
            cells: r.cells,
        };
        c.check_invariants().map_err(ComparisonError::Invalid)?;
        Ok(c)
    }
}

impl From<Comparison> for ComparisonRepr {
    fn from(c: Comparison) -> Self {
        ComparisonRepr {
            problem: c.problem,
            columns: c.columns,
            dimensions: c.dimensions,
            cells: c.cells,
        }
    }
}

impl Comparison {
    pub fn new(problem: impl Into<String>) -> Self {
        Comparison {
            problem: problem.into(),
            ..Default::default()
        }
    }

    pub fn problem(&self) -> &str {
        &self.problem
    }

    pub fn set_problem(&mut self, problem: impl Into<String>) {
        self.problem = problem.into();
    }

    pub fn columns(&self) -> &[ComparisonColumn] {
        &self.columns
    }

    pub fn dimensions(&self) -> &[Dimension] {
        &self.dimensions
    }

    /// Rows of cells, parallel to [`Comparison::dimensions`].
    pub fn rows(&self) -> &[Vec<String>] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty() && self.dimensions.is_empty()
    }

    pub fn dimension_index(&self, name_or_key: &str) -> Option<usize> {
        let key = dimension_key(name_or_key);
        self.dimensions.iter().position(|d| d.key == key)
    }

    pub fn column_index(&self, label: &str) -> Option<usize> {
        let label = label.trim();
        self.columns.iter().position(|c| c.label == label)
    }

    pub fn cell(&self, dimension: &str, column: &str) -> Option<&str> {
        let d = self.dimension_index(dimension)?;
        let c = self.column_index(column)?;
        Some(&self.cells[d][c])
    }

    pub fn set_source_ref(&mut self, column: usize, source_ref: Option<String>) {
        self.columns[column].source_ref = source_ref;
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        if self.cells.len() != self.dimensions.len() {
            return Err(format!(
                "{} cell rows for {} dimensions",
                self.cells.len(),
                self.dimensions.len()
            ));
        }
        if let Some((i, row)) = self
            .cells
            .iter()
            .enumerate()
            .find(|(_, row)| row.len() != self.columns.len())
        {
            return Err(format!(
                "row {i} has {} cells for {} columns",
                row.len(),
                self.columns.len()
            ));
        }
        let mut keys = HashSet::new();
        for d in &self.dimensions {
            if d.name.trim().is_empty() {
                return Err("empty dimension name".into());
            }
            if d.key != dimension_key(&d.name) {
                return Err(format!("dimension `{}` carries stale key `{}`", d.name, d.key));
            }
            if !keys.insert(d.key.as_str()) {
                return Err(format!("duplicate dimension key `{}`", d.key));
            }
        }
        let mut labels = HashSet::new();
        for c in &self.columns {
            if c.label.trim().is_empty() {
                return Err("empty column label".into());
            }
            if !labels.insert(c.label.as_str()) {
                return Err(format!("duplicate column label `{}`", c.label));
            }
        }
        Ok(())
    }

    pub fn snapshot(&self) -> CanonicalForm {
        let repr = ComparisonRepr::from(self.clone());
        CanonicalForm(serde_json::to_vec(&repr).expect("comparison serializes"))
    }

    pub fn snapshot_hash(&self) -> String {
        self.snapshot().hash()
    }

    fn find_dimension(&self, name_or_key: &str) -> Result<usize, ComparisonError> {
        self.dimension_index(name_or_key)
            .ok_or_else(|| ComparisonError::UnknownDimension(name_or_key.to_string()))
    }

    fn find_column(&self, label: &str) -> Result<usize, ComparisonError> {
        self.column_index(label)
            .ok_or_else(|| ComparisonError::UnknownColumn(label.to_string()))
    }

    fn non_empty(value: &str, field: &'static str) -> Result<(), ComparisonError> {
        if value.trim().is_empty() {
            Err(ComparisonError::EmptyIdentity(field))
        } else {
            Ok(())
        }
    }

    /// Applies one edit, returning the edited comparison.
    pub fn apply_edit(&self, cmd: &EditCommand) -> Result<Comparison, ComparisonError> {
        let mut next = self.clone();
        match cmd {
            EditCommand::AddDimension { name, definition } => {
                Self::non_empty(name, "name")?;
                let dim = Dimension::new(name, definition, Origin::User);
                if next.dimension_index(&dim.key).is_some() {
                    return Err(ComparisonError::DuplicateKey(dim.key));
                }
                next.dimensions.push(dim);
                next.cells.push(vec![String::new(); next.columns.len()]);
            }
            EditCommand::DeleteDimension { dimension } => {
                let d = next.find_dimension(dimension)?;
                next.dimensions.remove(d);
                next.cells.remove(d);
            }
            EditCommand::RenameDimension { dimension, to } => {
                let d = next.find_dimension(dimension)?;
                Self::non_empty(to, "to")?;
                let key = dimension_key(to);
                if next.dimensions[d].key != key && next.dimension_index(&key).is_some() {
                    return Err(ComparisonError::DuplicateKey(key));
                }
                let dim = &mut next.dimensions[d];
                dim.name = to.trim().to_string();
                dim.key = key;
                dim.needs_curation = !validate_dimension_name(&dim.name).is_valid();
            }
            EditCommand::SetDefinition {
                dimension,
                definition,
            } => {
                let d = next.find_dimension(dimension)?;
                next.dimensions[d].definition = definition.clone();
            }
            EditCommand::AddColumn { label, source_ref } => {
                Self::non_empty(label, "label")?;
                if next.column_index(label).is_some() {
                    return Err(ComparisonError::DuplicateLabel(label.trim().to_string()));
                }
                let mut column = ComparisonColumn::new(label);
                column.source_ref = source_ref.clone();
                next.columns.push(column);
                for row in &mut next.cells {
                    row.push(String::new());
                }
            }
            EditCommand::DeleteColumn { label } => {
                let c = next.find_column(label)?;
                next.columns.remove(c);
                for row in &mut next.cells {
                    row.remove(c);
                }
            }
            EditCommand::RenameColumn { label, to } => {
                let c = next.find_column(label)?;
                Self::non_empty(to, "to")?;
                if let Some(other) = next.column_index(to) {
                    if other != c {
                        return Err(ComparisonError::DuplicateLabel(to.trim().to_string()));
                    }
                }
                next.columns[c].label = to.trim().to_string();
            }
            EditCommand::SetCell {
                dimension,
                column,
                value,
            } => {
                let d = next.find_dimension(dimension)?;
                let c = next.find_column(column)?;
                next.cells[d][c] = value.clone();
            }
        }
        debug_assert_eq!(next.check_invariants(), Ok(()));
        Ok(next)
    }

    /// Applies a batch atomically. On failure reports the failing index.
    pub fn apply_edits(&self, cmds: &[EditCommand]) -> Result<Comparison, (usize, ComparisonError)> {
        let mut current = self.clone();
        for (i, cmd) in cmds.iter().enumerate() {
            current = current.apply_edit(cmd).map_err(|e| (i, e))?;
        }
        Ok(current)
    }

    /// Folds a parsed LLM response into this comparison.
    pub fn merge_ingest(
        &self,
        ingest: &ParsedIngest,
        strategy: MergeStrategy,
    ) -> Result<Comparison, ComparisonError> {
        match strategy {
            MergeStrategy::Replace => {
                let next = Comparison {
                    problem: self.problem.clone(),
                    columns: ingest
                        .columns
                        .iter()
                        .map(|c| ComparisonColumn::new(&c.label))
                        .collect(),
                    dimensions: ingest.dimensions.clone(),
                    cells: (0..ingest.dimensions.len())
                        .map(|d| ingest.columns.iter().map(|c| c.cells[d].clone()).collect())
                        .collect(),
                };
                next.check_invariants().map_err(ComparisonError::Invalid)?;
                Ok(next)
            }
            MergeStrategy::Extend => {
                let mut next = self.clone();
                for column in &ingest.columns {
                    if next.column_index(&column.label).is_some() {
                        return Err(ComparisonError::ColumnLabelClash(column.label.clone()));
                    }
                }
                // Row index in `next` for each ingest dimension.
                let mut targets = Vec::with_capacity(ingest.dimensions.len());
                for dim in &ingest.dimensions {
                    match next.dimension_index(&dim.key) {
                        Some(i) => {
                            if next.dimensions[i].definition.is_empty() {
                                next.dimensions[i].definition = dim.definition.clone();
                            }
                            targets.push(i);
                        }
                        None => {
                            next.dimensions.push(dim.clone());
                            next.cells.push(vec![String::new(); next.columns.len()]);
                            targets.push(next.dimensions.len() - 1);
                        }
                    }
                }
                for column in &ingest.columns {
                    next.columns.push(ComparisonColumn::new(&column.label));
                    for row in &mut next.cells {
                        row.push(String::new());
                    }
                    let c = next.columns.len() - 1;
                    for (d, value) in column.cells.iter().enumerate() {
                        next.cells[targets[d]][c] = value.clone();
                    }
                }
                next.check_invariants().map_err(ComparisonError::Invalid)?;
                Ok(next)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::IngestColumn;

    fn gpt() -> Comparison {
        let ingest = ParsedIngest::from_parts(
            ["architecture", "training data", "model size", "optimizer"]
                .iter()
                .map(|n| Dimension::new(n, &format!("{n} def"), Origin::Llm))
                .collect(),
            ["GPT-1", "GPT-2", "GPT-3"]
                .iter()
                .map(|l| IngestColumn {
                    label: l.to_string(),
                    cells: (0..4).map(|d| format!("{l}/{d}")).collect(),
                })
                .collect(),
        );
        Comparison::new("GPT family of large language models")
            .merge_ingest(&ingest, MergeStrategy::Replace)
            .unwrap()
    }

    #[test]
    fn key_normalization() {
        assert_eq!(dimension_key("  Model\t  Size "), "model size");
        assert_eq!(dimension_key("Pre-Training Data"), "pre-training data");
    }

    #[test]
    fn replace_builds_matrix() {
        let c = gpt();
        assert_eq!(c.columns().len(), 3);
        assert_eq!(c.dimensions().len(), 4);
        assert_eq!(c.cell_count(), 12);
        assert_eq!(c.cell("Model Size", "GPT-2"), Some("GPT-2/2"));
        assert_eq!(c.problem(), "GPT family of large language models");
    }

    #[test]
    fn empty_replace_is_empty() {
        let c = Comparison::default()
            .merge_ingest(&ParsedIngest::default(), MergeStrategy::Replace)
            .unwrap();
        assert!(c.is_empty());
        assert_eq!(c, Comparison::default());
    }

    #[test]
    fn delete_dimension_shrinks_row_and_registry() {
        let c = gpt();
        let d = c
            .apply_edit(&EditCommand::DeleteDimension {
                dimension: "optimizer".into(),
            })
            .unwrap();
        assert_eq!(d.dimensions().len(), 3);
        assert_eq!(d.cell_count(), c.cell_count() - 3);
        assert!(d.dimensions().iter().all(|x| x.key != "optimizer"));
    }

    #[test]
    fn identity_rename() {
        let c = gpt();
        let r = c
            .apply_edit(&EditCommand::RenameDimension {
                dimension: "architecture".into(),
                to: "architecture".into(),
            })
            .unwrap();
        assert_eq!(r, c);
        assert_eq!(r.snapshot(), c.snapshot());
    }

    #[test]
    fn rename_changes_case_but_rejects_collision() {
        let c = gpt();
        let r = c
            .apply_edit(&EditCommand::RenameDimension {
                dimension: "architecture".into(),
                to: "Architecture".into(),
            })
            .unwrap();
        assert_eq!(r.dimensions()[0].name, "Architecture");
        assert_eq!(r.dimensions()[0].definition, "architecture def");
        assert_eq!(r.rows()[0], c.rows()[0]);
        assert_eq!(
            c.apply_edit(&EditCommand::RenameDimension {
                dimension: "architecture".into(),
                to: "MODEL  size".into(),
            }),
            Err(ComparisonError::DuplicateKey("model size".into()))
        );
    }

    #[test]
    fn column_edits() {
        let c = gpt();
        let added = c
            .apply_edit(&EditCommand::AddColumn {
                label: "GPT-4".into(),
                source_ref: None,
            })
            .unwrap();
        assert_eq!(added.cell("optimizer", "GPT-4"), Some(""));
        let back = added
            .apply_edit(&EditCommand::DeleteColumn {
                label: "GPT-4".into(),
            })
            .unwrap();
        assert_eq!(back.snapshot(), c.snapshot());
        assert_eq!(
            c.apply_edit(&EditCommand::RenameColumn {
                label: "GPT-1".into(),
                to: "GPT-2".into()
            }),
            Err(ComparisonError::DuplicateLabel("GPT-2".into()))
        );
        assert_eq!(
            c.apply_edit(&EditCommand::DeleteColumn { label: "X".into() }),
            Err(ComparisonError::UnknownColumn("X".into()))
        );
        assert_eq!(
            c.apply_edit(&EditCommand::AddColumn {
                label: " ".into(),
                source_ref: None
            }),
            Err(ComparisonError::EmptyIdentity("label"))
        );
    }

    #[test]
    fn zero_columns_allowed() {
        let mut c = gpt();
        for l in ["GPT-1", "GPT-2", "GPT-3"] {
            c = c
                .apply_edit(&EditCommand::DeleteColumn { label: l.into() })
                .unwrap();
        }
        assert_eq!(c.dimensions().len(), 4);
        assert_eq!(c.cell_count(), 0);
        assert!(c.rows().iter().all(Vec::is_empty));
    }

    #[test]
    fn snapshot_changes_with_cell() {
        let c = gpt();
        let e = c
            .apply_edit(&EditCommand::SetCell {
                dimension: "model size".into(),
                column: "GPT-3".into(),
                value: "175B".into(),
            })
            .unwrap();
        assert_ne!(e.snapshot(), c.snapshot());
        assert_ne!(e.snapshot_hash(), c.snapshot_hash());
        assert_eq!(c.snapshot_hash().len(), 64);
    }

    #[test]
    fn batch_is_atomic() {
        let c = gpt();
        let err = c
            .apply_edits(&[
                EditCommand::DeleteDimension {
                    dimension: "optimizer".into(),
                },
                EditCommand::DeleteDimension {
                    dimension: "nope".into(),
                },
            ])
            .unwrap_err();
        assert_eq!(err.0, 1);
        assert_eq!(c.dimensions().len(), 4);
        assert_eq!(c.apply_edits(&[]).unwrap(), c);
    }

    #[test]
    fn extend_merges_by_key() {
        let c = gpt();
        let mut dims: Vec<_> = ["Architecture", "model size", "context window"]
            .iter()
            .map(|n| Dimension::new(n, "new def", Origin::Llm))
            .collect();
        dims[0].definition = "ignored".into();
        let ingest = ParsedIngest::from_parts(
            dims,
            vec![IngestColumn {
                label: "GPT-4".into(),
                cells: vec!["a".into(), "b".into(), "c".into()],
            }],
        );
        let e = c.merge_ingest(&ingest, MergeStrategy::Extend).unwrap();
        assert_eq!(e.columns().len(), 4);
        assert_eq!(e.dimensions().len(), 5);
        assert_eq!(e.cell_count(), 20);
        assert_eq!(e.dimensions()[0].definition, "architecture def");
        assert_eq!(e.cell("context window", "GPT-4"), Some("c"));
        assert_eq!(e.cell("context window", "GPT-1"), Some(""));
        assert_eq!(e.cell("optimizer", "GPT-4"), Some(""));
        assert_eq!(
            e.merge_ingest(&ingest, MergeStrategy::Extend),
            Err(ComparisonError::ColumnLabelClash("GPT-4".into()))
        );
    }

    #[test]
    fn serde_round_trip_and_rejects_ragged() {
        let c = gpt();
        let json = serde_json::to_string(&c).unwrap();
        let back: Comparison = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
        v["cells"][0].as_array_mut().unwrap().pop();
        assert!(serde_json::from_value::<Comparison>(v).is_err());
    }

    #[test]
    fn long_names_flagged() {
        let c = Comparison::default()
            .apply_edit(&EditCommand::AddDimension {
                name: "impact of climate change on species".into(),
                definition: String::new(),
            })
            .unwrap();
        assert!(c.dimensions()[0].needs_curation);
        let fixed = c
            .apply_edit(&EditCommand::RenameDimension {
                dimension: "impact of climate change on species".into(),
                to: "impact on species".into(),
            })
            .unwrap();
        assert!(!fixed.dimensions()[0].needs_curation);
    }
}
