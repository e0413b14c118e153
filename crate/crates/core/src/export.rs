//! CSV serialization of comparisons.
//!
//! Output is UTF-8 without a byte-order mark and quoted per RFC 4180: a
//! field is wrapped in double quotes when it contains a comma, a quote, CR
//! or LF, and embedded quotes are doubled. Every record, including the
//! last, ends with the profile's line ending.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comparison::Comparison;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    #[default]
    GenericComparison,
    Definitions,
    OrkgImport,
}

impl Flavor {
    /// `<workspace>-comparison.csv` and friends.
    pub fn file_name(self, workspace: &str) -> String {
        let suffix = match self {
            Flavor::GenericComparison => "comparison",
            Flavor::Definitions => "definitions",
            Flavor::OrkgImport => "orkg-import",
        };
        format!("{workspace}-{suffix}.csv")
    }
}

impl std::str::FromStr for Flavor {
    type Err = String;

    /// Accepts the short CLI names as well as the full ones.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "generic" | "generic_comparison" | "comparison" => Ok(Flavor::GenericComparison),
            "definitions" => Ok(Flavor::Definitions),
            "orkg" | "orkg_import" => Ok(Flavor::OrkgImport),
            other => Err(format!("unknown export flavor `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyCellPolicy {
    #[default]
    Empty,
    LiteralNa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LineEnding {
    #[default]
    LF,
    CRLF,
}

impl LineEnding {
    fn as_str(self) -> &'static str {
        match self {
            LineEnding::LF => "\n",
            LineEnding::CRLF => "\r\n",
        }
    }
}

/// Bibliographic data for one comparison column in the ORKG flavor.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperMetadata {
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportProfile {
    pub flavor: Flavor,
    #[serde(default)]
    pub empty_cell_policy: EmptyCellPolicy,
    #[serde(default)]
    pub line_ending: LineEnding,
    /// Keyed by column label. Required for every column in the ORKG flavor.
    #[serde(default)]
    pub metadata: BTreeMap<String, PaperMetadata>,
}

impl ExportProfile {
    pub fn new(flavor: Flavor) -> Self {
        ExportProfile {
            flavor,
            ..Default::default()
        }
    }
}

/// Reserved leading columns of the ORKG CSV import format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrkgSchema {
    pub paper_title: String,
    pub paper_doi: String,
    pub publication_year: String,
    pub research_problem: String,
}

impl OrkgSchema {
    pub fn bundled() -> &'static OrkgSchema {
        static SCHEMA: OnceLock<OrkgSchema> = OnceLock::new();
        SCHEMA.get_or_init(|| {
            serde_json::from_str(include_str!("../config/orkg-import.json"))
                .expect("bundled ORKG schema parses")
        })
    }

    pub fn header(&self) -> [&str; 4] {
        [
            &self.paper_title,
            &self.paper_doi,
            &self.publication_year,
            &self.research_problem,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExportError {
    #[error("column `{0}` has no paper title in the export metadata")]
    MissingMetadata(String),
}

fn needs_quotes(field: &str) -> bool {
    field.contains([',', '"', '\n', '\r'])
}

/// Appends one RFC 4180 field.
pub fn push_field(out: &mut String, field: &str) {
    if needs_quotes(field) {
        out.push('"');
        out.push_str(&field.replace('"', "\"\""));
        out.push('"');
    } else {
        out.push_str(field);
    }
}

struct Writer {
    out: String,
    eol: &'static str,
}

impl Writer {
    fn new(ending: LineEnding) -> Self {
        Writer {
            out: String::new(),
            eol: ending.as_str(),
        }
    }

    fn record<'a>(&mut self, fields: impl IntoIterator<Item = &'a str>) {
        for (i, field) in fields.into_iter().enumerate() {
            if i > 0 {
                self.out.push(',');
            }
            push_field(&mut self.out, field);
        }
        self.out.push_str(self.eol);
    }

    fn finish(self) -> Vec<u8> {
        self.out.into_bytes()
    }
}

fn value(policy: EmptyCellPolicy, v: &str) -> &str {
    match policy {
        EmptyCellPolicy::LiteralNa if v.is_empty() => "N/A",
        _ => v,
    }
}

/// `Dimension,<label1>,<label2>,...` then one record per dimension.
pub fn export_comparison(comparison: &Comparison, profile: &ExportProfile) -> Vec<u8> {
    let mut w = Writer::new(profile.line_ending);
    w.record(
        std::iter::once("Dimension").chain(comparison.columns().iter().map(|c| c.label.as_str())),
    );
    for (dim, row) in comparison.dimensions().iter().zip(comparison.rows()) {
        w.record(
            std::iter::once(dim.name.as_str())
                .chain(row.iter().map(|v| value(profile.empty_cell_policy, v))),
        );
    }
    w.finish()
}

/// `Dimension,Definition` then one record per dimension.
pub fn export_definitions(comparison: &Comparison, profile: &ExportProfile) -> Vec<u8> {
    let mut w = Writer::new(profile.line_ending);
    w.record(["Dimension", "Definition"]);
    for dim in comparison.dimensions() {
        w.record([
            dim.name.as_str(),
            value(profile.empty_cell_policy, &dim.definition),
        ]);
    }
    w.finish()
}

/// Transposed layout for the ORKG CSV importer: one record per column.
/// Empty cells stay empty (the property is absent for that paper).
pub fn export_orkg(comparison: &Comparison, profile: &ExportProfile) -> Result<Vec<u8>, ExportError> {
    export_orkg_with(comparison, profile, OrkgSchema::bundled())
}

pub fn export_orkg_with(
    comparison: &Comparison,
    profile: &ExportProfile,
    schema: &OrkgSchema,
) -> Result<Vec<u8>, ExportError> {
    let mut papers = Vec::with_capacity(comparison.columns().len());
    for column in comparison.columns() {
        match profile.metadata.get(&column.label) {
            Some(meta) if !meta.title.trim().is_empty() => papers.push(meta),
            _ => return Err(ExportError::MissingMetadata(column.label.clone())),
        }
    }
    let mut w = Writer::new(profile.line_ending);
    w.record(
        schema
            .header()
            .into_iter()
            .chain(comparison.dimensions().iter().map(|d| d.name.as_str())),
    );
    for (c, meta) in papers.iter().enumerate() {
        let fixed = [
            meta.title.as_str(),
            meta.doi.as_deref().unwrap_or(""),
            meta.year.as_deref().unwrap_or(""),
            comparison.problem(),
        ];
        w.record(
            fixed
                .into_iter()
                .chain(comparison.rows().iter().map(|row| row[c].as_str())),
        );
    }
    Ok(w.finish())
}

/// Dispatches on `profile.flavor`.
pub fn export(comparison: &Comparison, profile: &ExportProfile) -> Result<Vec<u8>, ExportError> {
    match profile.flavor {
        Flavor::GenericComparison => Ok(export_comparison(comparison, profile)),
        Flavor::Definitions => Ok(export_definitions(comparison, profile)),
        Flavor::OrkgImport => export_orkg(comparison, profile),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comparison::EditCommand;

    fn fixture() -> Comparison {
        Comparison::new("P")
            .apply_edits(&[
                EditCommand::AddDimension {
                    name: "a".into(),
                    definition: "first".into(),
                },
                EditCommand::AddDimension {
                    name: "b".into(),
                    definition: String::new(),
                },
                EditCommand::AddColumn {
                    label: "X".into(),
                    source_ref: None,
                },
                EditCommand::AddColumn {
                    label: "Y".into(),
                    source_ref: None,
                },
                EditCommand::SetCell {
                    dimension: "a".into(),
                    column: "X".into(),
                    value: "uses \"BPE\", 40GB".into(),
                },
            ])
            .unwrap()
    }

    #[test]
    fn generic_layout_and_quoting() {
        let out = export_comparison(&fixture(), &ExportProfile::default());
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "Dimension,X,Y\na,\"uses \"\"BPE\"\", 40GB\",\nb,,\n"
        );
    }

    #[test]
    fn na_policy_and_crlf() {
        let profile = ExportProfile {
            empty_cell_policy: EmptyCellPolicy::LiteralNa,
            line_ending: LineEnding::CRLF,
            ..Default::default()
        };
        let out = String::from_utf8(export_comparison(&fixture(), &profile)).unwrap();
        assert_eq!(out, "Dimension,X,Y\r\na,\"uses \"\"BPE\"\", 40GB\",N/A\r\nb,N/A,N/A\r\n");
    }

    #[test]
    fn definitions_layout() {
        let out = export_definitions(&fixture(), &ExportProfile::new(Flavor::Definitions));
        assert_eq!(String::from_utf8(out).unwrap(), "Dimension,Definition\na,first\nb,\n");
        let empty = export_definitions(&Comparison::new("P"), &ExportProfile::default());
        assert_eq!(empty, b"Dimension,Definition\n");
    }

    #[test]
    fn orkg_requires_titles() {
        let mut profile = ExportProfile::new(Flavor::OrkgImport);
        profile.metadata.insert(
            "X".into(),
            PaperMetadata {
                title: "Paper X".into(),
                doi: Some("10.1/x".into()),
                year: Some("2018".into()),
            },
        );
        assert_eq!(
            export_orkg(&fixture(), &profile),
            Err(ExportError::MissingMetadata("Y".into()))
        );
        profile.metadata.insert(
            "Y".into(),
            PaperMetadata {
                title: "Paper, Y".into(),
                ..Default::default()
            },
        );
        let out = String::from_utf8(export_orkg(&fixture(), &profile).unwrap()).unwrap();
        assert_eq!(
            out,
            "paper:title,paper:doi,paper:publication_year,contribution:research_problem,a,b\n\
             Paper X,10.1/x,2018,P,\"uses \"\"BPE\"\", 40GB\",\n\
             \"Paper, Y\",,,P,,\n"
        );
    }

    #[test]
    fn flavor_names() {
        assert_eq!("generic".parse(), Ok(Flavor::GenericComparison));
        assert_eq!("orkg".parse(), Ok(Flavor::OrkgImport));
        assert!("xlsx".parse::<Flavor>().is_err());
        assert_eq!(Flavor::OrkgImport.file_name("gpt"), "gpt-orkg-import.csv");
    }
}
