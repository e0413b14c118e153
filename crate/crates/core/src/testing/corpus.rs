//! The response fixture corpus and its hand-written expectations.
//!
//! Each `NAME.md` under [`fixtures_dir`] has a sibling `NAME.expected.json`
//! listing the header of each selected table, the column labels, every
//! dimension with its definition and cells, and the exact warnings. A
//! response that must be rejected expects `{"error": "no_usable_table"}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::comparison::Origin;
use crate::ingest::{parse_response, IngestError, ParsedIngest, RawTable};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/responses")
}

/// Raw text of one fixture, e.g. `fixture("01-gpt-family")`.
pub fn fixture(name: &str) -> String {
    let path = fixtures_dir().join(format!("{name}.md"));
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Expected {
    Error { error: String },
    Parsed(ExpectedParse),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpectedParse {
    comparison_header: Option<Vec<String>>,
    definitions_header: Option<Vec<String>>,
    columns: Vec<String>,
    dimensions: Vec<ExpectedDimension>,
    warnings: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpectedDimension {
    name: String,
    definition: String,
    cells: Vec<String>,
    #[serde(default)]
    needs_curation: bool,
}

fn oracle_key(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

fn check_header(what: &str, got: &Option<RawTable>, want: &Option<Vec<String>>) -> Result<(), String> {
    let got = got.as_ref().map(|t| &t.header);
    if got != want.as_ref() {
        return Err(format!("{what} header: got {got:?}, want {want:?}"));
    }
    Ok(())
}

fn check_parse(got: &ParsedIngest, want: &ExpectedParse) -> Result<(), String> {
    check_header("comparison", &got.comparison_table, &want.comparison_header)?;
    check_header("definitions", &got.definitions_table, &want.definitions_header)?;
    let labels: Vec<&str> = got.columns.iter().map(|c| c.label.as_str()).collect();
    if labels != want.columns {
        return Err(format!("columns: got {labels:?}, want {:?}", want.columns));
    }
    if got.dimensions.len() != want.dimensions.len() {
        let names: Vec<&str> = got.dimensions.iter().map(|d| d.name.as_str()).collect();
        return Err(format!("dimensions: got {names:?}"));
    }
    for (i, (d, w)) in got.dimensions.iter().zip(&want.dimensions).enumerate() {
        let expect = (
            w.name.as_str(),
            oracle_key(&w.name),
            w.definition.as_str(),
            Origin::Llm,
            w.needs_curation,
        );
        let actual = (
            d.name.as_str(),
            d.key.clone(),
            d.definition.as_str(),
            d.origin,
            d.needs_curation,
        );
        if actual != expect {
            return Err(format!("dimension {i}: got {actual:?}, want {expect:?}"));
        }
        let cells: Vec<&str> = got.columns.iter().map(|c| c.cells[i].as_str()).collect();
        if cells != w.cells {
            return Err(format!("cells of `{}`: got {cells:?}, want {:?}", w.name, w.cells));
        }
    }
    if got.columns.iter().any(|c| c.cells.len() != got.dimensions.len()) {
        return Err("a column is not rectangular".into());
    }
    if got.warnings != want.warnings {
        return Err(format!("warnings: got {:#?}, want {:#?}", got.warnings, want.warnings));
    }
    Ok(())
}

/// Parses `raw` and compares it with the expectation document `expected`.
pub fn check(raw: &str, expected: &str) -> Result<(), String> {
    let want: Expected = serde_json::from_str(expected).map_err(|e| format!("bad expectation: {e}"))?;
    match (parse_response(raw), want) {
        (Err(IngestError::NoUsableTable), Expected::Error { error }) if error == "no_usable_table" => Ok(()),
        (Err(e), _) => Err(format!("unexpected error: {e}")),
        (Ok(got), Expected::Error { error }) => Err(format!("expected {error}, parsed {} dimensions", got.dimensions.len())),
        (Ok(got), Expected::Parsed(want)) => check_parse(&got, &want),
    }
}

/// Checks every fixture, returning `(name, outcome)` in name order.
pub fn check_all() -> Vec<(String, Result<(), String>)> {
    let mut names: Vec<String> = fs::read_dir(fixtures_dir())
        .expect("fixture directory")
        .filter_map(Result::ok)
        .filter_map(|e| {
            e.file_name()
                .to_str()
                .and_then(|n| n.strip_suffix(".md"))
                .map(str::to_string)
        })
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|name| {
            let raw = fixture(&name);
            let path = fixtures_dir().join(format!("{name}.expected.json"));
            let outcome = match fs::read_to_string(&path) {
                Ok(expected) => check(&raw, &expected),
                Err(e) => Err(format!("{}: {e}", path.display())),
            };
            (name, outcome)
        })
        .collect()
}
