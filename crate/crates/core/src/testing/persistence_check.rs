//! Save/load identity over generated workspaces, and crash simulation.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use chrono::{DateTime, TimeZone, Utc};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use serde_json::{json, Value};

use crate::catalog::ScenarioId;
use crate::comparison::EditCommand;
use crate::export::PaperMetadata;
use crate::gateway::TransportRecord;
use crate::testing::export_check::comparison_strategy;
use crate::workspace::{self, ContextDoc, EntryKind, ProvenanceEntry, Workspace, SCHEMA_VERSION};

fn timestamp() -> impl Strategy<Value = DateTime<Utc>> {
    (0i64..4_000_000_000).prop_map(|s| Utc.timestamp_opt(s, 0).unwrap())
}

fn text() -> BoxedStrategy<String> {
    "\\PC{0,24}".boxed()
}

fn edit() -> impl Strategy<Value = EditCommand> {
    prop_oneof![
        (text(), text()).prop_map(|(name, definition)| EditCommand::AddDimension { name, definition }),
        text().prop_map(|dimension| EditCommand::DeleteDimension { dimension }),
        (text(), text()).prop_map(|(label, to)| EditCommand::RenameColumn { label, to }),
        (text(), text(), text()).prop_map(|(dimension, column, value)| EditCommand::SetCell {
            dimension,
            column,
            value
        }),
    ]
}

fn transport() -> impl Strategy<Value = TransportRecord> {
    (text(), text(), 1u32..5, proptest::option::of(0u64..100_000)).prop_map(
        |(endpoint, model, attempts, tokens)| TransportRecord {
            endpoint,
            model,
            attempts,
            usage: tokens.map(|t| json!({ "prompt_tokens": t, "completion_tokens": t / 2 })),
        },
    )
}

fn entry() -> impl Strategy<Value = ProvenanceEntry> {
    let kind = prop_oneof![
        Just(EntryKind::Prompt),
        Just(EntryKind::Chat),
        Just(EntryKind::Ingest),
        Just(EntryKind::Edit)
    ];
    (
        timestamp(),
        kind,
        proptest::option::of(proptest::sample::select(ScenarioId::ALL.to_vec())),
        "\\PC{1,40}",
        proptest::option::of(text()),
        proptest::collection::vec(text(), 0..3),
        proptest::collection::vec(edit(), 0..4),
        ("[0-9a-f]{64}", "[0-9a-f]{64}"),
        proptest::option::of(transport()),
    )
        .prop_map(
            |(timestamp, kind, scenario, prompt, response_text, ingest_warnings, edits, (pre, post), transport)| {
                let prompt_text = match kind {
                    EntryKind::Prompt | EntryKind::Chat => Some(prompt),
                    _ if prompt.len() % 2 == 0 => Some(prompt),
                    _ => None,
                };
                ProvenanceEntry {
                    timestamp,
                    kind,
                    scenario,
                    prompt_text,
                    response_text,
                    ingest_warnings,
                    edits,
                    pre_snapshot: pre,
                    post_snapshot: post,
                    transport,
                }
            },
        )
}

fn paper() -> impl Strategy<Value = PaperMetadata> {
    (text(), proptest::option::of(text()), proptest::option::of("[12][0-9]{3}")).prop_map(
        |(title, doi, year)| PaperMetadata { title, doi, year },
    )
}

fn extra() -> impl Strategy<Value = serde_json::Map<String, Value>> {
    proptest::collection::btree_map(
        "x_[a-z]{1,6}",
        prop_oneof![any::<i64>().prop_map(Value::from), text().prop_map(Value::from)],
        0..3,
    )
    .prop_map(|m| m.into_iter().collect())
}

pub fn workspace_strategy() -> impl Strategy<Value = Workspace> {
    (
        "[a-z0-9][a-z0-9-]{0,30}",
        (timestamp(), timestamp()),
        text(),
        proptest::collection::vec((text(), text(), proptest::option::of(text())), 0..4),
        comparison_strategy(),
        proptest::collection::btree_map(text(), paper(), 0..3),
        proptest::collection::vec(entry(), 0..6),
        extra(),
    )
        .prop_map(
            |(id, (created, modified), problem, contexts, comparison, papers, log, extra)| Workspace {
                schema_version: SCHEMA_VERSION,
                id,
                created,
                modified,
                problem,
                contexts: contexts
                    .into_iter()
                    .map(|(label, body, source)| ContextDoc { label, body, source })
                    .collect(),
                comparison,
                papers: papers.into_iter().collect::<BTreeMap<_, _>>(),
                log,
                extra,
            },
        )
}

/// Saves and reloads `cases` generated workspaces under `root`.
pub fn run(cases: u32, root: &Path) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner
        .run(&workspace_strategy(), |mut ws| {
            workspace::save(&mut ws, root).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let back = workspace::load_id(root, &ws.id).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(&back, &ws);
            prop_assert_eq!(back.to_bytes(), ws.to_bytes());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Saves a workspace, then fails a rewrite halfway through. The file must
/// still hold the first version and no temp file may be left behind.
pub fn interrupted_write(root: &Path) -> Result<(), String> {
    let mut ws = Workspace::new("crash-test", "GPT family of large language models").map_err(|e| e.to_string())?;
    let path = workspace::save(&mut ws, root).map_err(|e| e.to_string())?;
    let before = fs::read(&path).map_err(|e| e.to_string())?;

    let mut next = ws.clone();
    next.problem = "a different problem".into();
    let bytes = next.to_bytes();
    let outcome = workspace::atomic_write_with(&path, |w| {
        w.write_all(&bytes[..bytes.len() / 2])?;
        Err(io::Error::other("simulated crash"))
    });
    if outcome.is_ok() {
        return Err("the failing write reported success".into());
    }
    if fs::read(&path).map_err(|e| e.to_string())? != before {
        return Err("the prior file was modified".into());
    }
    let loaded = workspace::load(&path).map_err(|e| e.to_string())?;
    if loaded != ws {
        return Err("the prior workspace does not load back".into());
    }
    let leftovers: Vec<_> = fs::read_dir(root)
        .map_err(|e| e.to_string())?
        .filter_map(Result::ok)
        .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
        .collect();
    if !leftovers.is_empty() {
        return Err(format!("{} temp files left behind", leftovers.len()));
    }
    Ok(())
}
