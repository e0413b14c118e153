//! Export round trips through an independent CSV reader.

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use crate::comparison::{Comparison, Dimension, MergeStrategy, Origin};
use crate::export::{export, EmptyCellPolicy, ExportProfile, Flavor, LineEnding};
use crate::ingest::{IngestColumn, ParsedIngest};

/// Re-reads CSV bytes with the `csv` crate, rejecting ragged records.
pub fn reread(bytes: &[u8]) -> Result<Vec<Vec<String>>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_reader(bytes);
    reader
        .records()
        .map(|r| {
            r.map(|rec| rec.iter().map(str::to_string).collect())
                .map_err(|e| e.to_string())
        })
        .collect()
}

/// Builds a comparison from arbitrary strings. A unique suffix keeps
/// dimension keys and column labels distinct.
pub fn build(names: &[(String, String)], labels: &[String], cells: &[String]) -> Comparison {
    let dimensions: Vec<Dimension> = names
        .iter()
        .enumerate()
        .map(|(i, (n, d))| Dimension::new(&format!("{n} #{i}"), d, Origin::Llm))
        .collect();
    let columns = labels
        .iter()
        .enumerate()
        .map(|(j, l)| IngestColumn {
            label: format!("{l} [{j}]"),
            cells: (0..names.len())
                .map(|i| cells.get(i * labels.len() + j).cloned().unwrap_or_default())
                .collect(),
        })
        .collect();
    Comparison::new("problem")
        .merge_ingest(&ParsedIngest::from_parts(dimensions, columns), MergeStrategy::Replace)
        .expect("generated comparison is valid")
}

fn tricky_text() -> BoxedStrategy<String> {
    prop_oneof![
        "\\PC{0,16}",
        "[,\"\r\n a-c]{0,8}",
        Just(String::new()),
    ]
    .boxed()
}

pub fn comparison_strategy() -> impl Strategy<Value = Comparison> {
    (0usize..8, 0usize..6).prop_flat_map(|(nd, nc)| {
        (
            proptest::collection::vec((tricky_text(), tricky_text()), nd),
            proptest::collection::vec(tricky_text(), nc),
            proptest::collection::vec(tricky_text(), nd * nc),
        )
            .prop_map(|(names, labels, cells)| build(&names, &labels, &cells))
    })
}

fn profile(flavor: Flavor, na: bool, crlf: bool) -> ExportProfile {
    let mut p = ExportProfile::new(flavor);
    if na {
        p.empty_cell_policy = EmptyCellPolicy::LiteralNa;
    }
    if crlf {
        p.line_ending = LineEnding::CRLF;
    }
    p
}

/// Exports the generic and definitions CSVs and checks every field.
pub fn check(cmp: &Comparison, na: bool, crlf: bool) -> Result<(), String> {
    let shown = |v: &str| if na && v.is_empty() { "N/A".to_string() } else { v.to_string() };
    let eol = if crlf { "\r\n" } else { "\n" };

    let bytes = export(cmp, &profile(Flavor::GenericComparison, na, crlf)).map_err(|e| e.to_string())?;
    if !String::from_utf8_lossy(&bytes).ends_with(eol) {
        return Err("export lacks a trailing line ending".into());
    }
    let records = reread(&bytes)?;
    let mut want = vec![std::iter::once("Dimension".to_string())
        .chain(cmp.columns().iter().map(|c| c.label.clone()))
        .collect::<Vec<_>>()];
    for (dim, row) in cmp.dimensions().iter().zip(cmp.rows()) {
        want.push(std::iter::once(dim.name.clone()).chain(row.iter().map(|v| shown(v))).collect());
    }
    if records != want {
        return Err(format!("generic export re-read as {records:?}, want {want:?}"));
    }

    let bytes = export(cmp, &profile(Flavor::Definitions, na, crlf)).map_err(|e| e.to_string())?;
    let records = reread(&bytes)?;
    let mut want = vec![vec!["Dimension".to_string(), "Definition".to_string()]];
    for dim in cmp.dimensions() {
        want.push(vec![dim.name.clone(), shown(&dim.definition)]);
    }
    if records != want {
        return Err(format!("definitions export re-read as {records:?}, want {want:?}"));
    }
    Ok(())
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

/// `cases` random comparisons, each exported and re-read.
pub fn run(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(
            &(comparison_strategy(), any::<bool>(), any::<bool>()),
            |(cmp, na, crlf)| check(&cmp, na, crlf).map_err(TestCaseError::fail),
        )
        .map_err(|e| e.to_string())
}

/// Cells made only of separators, quotes and line breaks; the record count
/// and width must survive.
pub fn run_quoting_fuzz(cases: u32) -> Result<(), String> {
    let cell = "[,\"\r\n]{1,6}";
    let strategy = (1usize..5, 1usize..5).prop_flat_map(move |(nd, nc)| {
        (
            proptest::collection::vec((cell, cell), nd),
            proptest::collection::vec(cell, nc),
            proptest::collection::vec(cell, nd * nc),
            any::<bool>(),
        )
    });
    runner(cases)
        .run(&strategy, |(names, labels, cells, crlf)| {
            let cmp = build(&names, &labels, &cells);
            let bytes = export(&cmp, &profile(Flavor::GenericComparison, false, crlf))
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            let records = reread(&bytes).map_err(TestCaseError::fail)?;
            prop_assert_eq!(records.len(), cmp.dimensions().len() + 1);
            prop_assert!(records.iter().all(|r| r.len() == cmp.columns().len() + 1));
            check(&cmp, false, crlf).map_err(TestCaseError::fail)
        })
        .map_err(|e| e.to_string())
}
