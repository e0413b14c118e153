mod support;

use std::collections::HashMap;
use std::path::Path;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Command, Stdio};

use raforge_cli::{run, Io, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};
use raforge_core::testing::{corpus, golden, StubReply, StubServer};
use raforge_core::catalog::{Catalog, SlotName};
use raforge_core::workspace;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

struct Shell {
    dir: tempfile::TempDir,
    env: HashMap<String, String>,
}

impl Shell {
    fn new() -> Shell {
        Shell {
            dir: tempfile::tempdir().unwrap(),
            env: HashMap::new(),
        }
    }

    fn root(&self) -> &Path {
        self.dir.path()
    }

    fn run_with_stdin(&self, args: &[&str], stdin: &str) -> Outcome {
        let home = self.root().display().to_string();
        let mut argv = vec!["ra-forge", "--home", &home];
        argv.extend_from_slice(args);
        let env = |name: &str| self.env.get(name).cloned();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            argv,
            &mut Io {
                env: &env,
                stdin: &mut stdin.as_bytes(),
                stdout: &mut out,
                stderr: &mut err,
            },
        );
        Outcome {
            code,
            stdout: String::from_utf8(out).unwrap(),
            stderr: String::from_utf8(err).unwrap(),
        }
    }

    fn run(&self, args: &[&str]) -> Outcome {
        self.run_with_stdin(args, "")
    }

    fn ok(&self, args: &[&str]) -> String {
        let o = self.run(args);
        assert_eq!(o.code, EXIT_OK, "{args:?}: {}", o.stderr);
        o.stdout
    }

    /// Workspace `g` holding the GPT fixture.
    fn with_gpt(self) -> Shell {
        self.ok(&["ws", "new", "g", "--problem", golden::GPT_PROBLEM]);
        let fixture = corpus::fixtures_dir().join(format!("{}.md", golden::GPT_FIXTURE));
        self.ok(&["ingest", "--ws", "g", fixture.to_str().unwrap()]);
        self
    }
}

fn context_args() -> Vec<String> {
    golden::GPT_LABELS
        .iter()
        .flat_map(|l| {
            [
                "--context".to_string(),
                golden::context_path(l).display().to_string(),
                "--label".to_string(),
                l.to_string(),
            ]
        })
        .collect()
}

#[test]
fn binary_session_matches_goldens_and_the_api() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cli = support::cli_session(a.path()).unwrap();
    cli.check_goldens().unwrap();
    assert_eq!(support::http_session(b.path()).unwrap(), cli);
}

#[test]
fn prompt_without_a_workspace_needs_every_slot() {
    let sh = Shell::new();
    let mut args = vec!["prompt", "compare-contexts", "--problem", golden::GPT_PROBLEM];
    let ctx = context_args();
    args.extend(ctx.iter().map(String::as_str));
    let out = sh.ok(&args);
    assert_eq!(out, golden::template_golden(raforge_core::ScenarioId::CompareContexts));

    let o = sh.run(&["prompt", "compare-contexts", "--problem", "x"]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("slots for compare-contexts"), "{}", o.stderr);
    assert!(o.stderr.contains("contexts (required, min 2)"));
}

#[test]
fn usage_and_operational_errors_have_distinct_codes() {
    let sh = Shell::new();
    assert_eq!(sh.run(&["prompt", "no-such-task"]).code, EXIT_USAGE);
    assert_eq!(sh.run(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(sh.run(&["ws", "new", "Bad_Id"]).code, EXIT_USAGE);
    assert_eq!(sh.run(&["ws", "show", "absent"]).code, EXIT_FAILURE);
    let help = sh.run(&["--help"]);
    assert_eq!(help.code, EXIT_OK);
    assert!(help.stdout.contains("Usage"));
}

#[test]
fn ra_home_is_the_default_root() {
    let sh = Shell::new();
    let mut env = HashMap::new();
    env.insert("RA_HOME".to_string(), sh.root().display().to_string());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(
        ["ra-forge", "ws", "new", "from-env"],
        &mut Io {
            env: &|n: &str| env.get(n).cloned(),
            stdin: &mut "".as_bytes(),
            stdout: &mut out,
            stderr: &mut err,
        },
    );
    assert_eq!(code, EXIT_OK);
    assert!(workspace::workspace_path(sh.root(), "from-env").exists());
}

#[test]
fn ingest_reads_stdin_and_reports_warnings() {
    let sh = Shell::new();
    sh.ok(&["ws", "new", "s"]);
    let o = sh.run_with_stdin(&["ingest", "--ws", "s", "-"], &corpus::fixture("09-duplicates"));
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stderr.contains("warning:"), "{}", o.stderr);

    let o = sh.run_with_stdin(&["ingest", "--ws", "s", "-"], &corpus::fixture("17-no-table"));
    assert_eq!(o.code, EXIT_FAILURE);
}

#[test]
fn batch_edits_are_atomic_and_base_hash_is_checked() {
    let sh = Shell::new().with_gpt();
    let before = workspace::load_id(sh.root(), "g").unwrap();
    let batch = sh.root().join("batch.json");
    std::fs::write(
        &batch,
        r#"[{"kind": "DeleteDimension", "dimension": "optimizer"},
            {"kind": "RenameColumn", "label": "GPT-9", "to": "x"}]"#,
    )
    .unwrap();
    let o = sh.run(&["edit", "--ws", "g", "batch", batch.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_FAILURE);
    assert!(o.stderr.contains("edit 1 failed"), "{}", o.stderr);
    assert_eq!(workspace::load_id(sh.root(), "g").unwrap().comparison, before.comparison);

    let stale = "0".repeat(64);
    let o = sh.run(&["edit", "--ws", "g", "--base-hash", &stale, "delete-dimension", "optimizer"]);
    assert_eq!(o.code, EXIT_FAILURE);
    assert!(o.stderr.contains("stale snapshot"));

    let hash = before.comparison.snapshot_hash();
    let out = sh.ok(&["edit", "--ws", "g", "--base-hash", &hash, "set-cell", "optimizer", "GPT-1", "SGD"]);
    let after = workspace::load_id(sh.root(), "g").unwrap();
    assert_eq!(out.trim(), after.comparison.snapshot_hash());
}

#[test]
fn orkg_export_needs_paper_metadata() {
    let sh = Shell::new().with_gpt();
    let o = sh.run(&["export", "--ws", "g", "--flavor", "orkg", "-o", "-"]);
    assert_eq!(o.code, EXIT_FAILURE);
    assert!(o.stderr.contains("GPT-1"));

    for (label, paper) in golden::papers() {
        let mut args = vec!["ws", "set-paper", "g", &label, "--title", &paper.title];
        if let Some(doi) = &paper.doi {
            args.extend(["--doi", doi]);
        }
        if let Some(year) = &paper.year {
            args.extend(["--year", year]);
        }
        sh.ok(&args);
    }
    assert_eq!(sh.ok(&["export", "--ws", "g", "--flavor", "orkg", "-o", "-"]), golden::orkg_golden());
    assert_eq!(sh.run(&["ws", "set-paper", "g", "GPT-7", "--title", "t"]).code, EXIT_USAGE);
}

#[test]
fn export_metadata_file_and_default_file_name() {
    let sh = Shell::new().with_gpt();
    let meta = sh.root().join("papers.json");
    std::fs::write(&meta, serde_json::to_string(&golden::papers()).unwrap()).unwrap();
    let out = sh.ok(&["export", "--ws", "g", "--flavor", "orkg", "--metadata", meta.to_str().unwrap(), "-o", "-"]);
    assert_eq!(out, golden::orkg_golden());

    let cwd = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_ra-forge"))
        .current_dir(cwd.path())
        .args(["--home", sh.root().to_str().unwrap(), "export", "--ws", "g", "--na", "--crlf"])
        .output()
        .unwrap();
    assert!(status.status.success());
    assert_eq!(String::from_utf8_lossy(&status.stderr), "wrote g-comparison.csv\n");
    let written = std::fs::read_to_string(cwd.path().join("g-comparison.csv")).unwrap();
    assert!(written.starts_with("Dimension,GPT-1,GPT-2,GPT-3\r\n"));
}

#[test]
fn dimensions_file_and_selection_feed_the_prompt() {
    let sh = Shell::new();
    let dims = sh.root().join("dims.csv");
    std::fs::write(&dims, "Dimension,Definition\nmodel size,parameter count\noptimizer,update rule\n").unwrap();
    let out = sh.ok(&[
        "prompt",
        "research-ideas",
        "--problem",
        "p",
        "--dimensions",
        dims.to_str().unwrap(),
        "--select",
        "Optimizer",
    ]);
    assert!(out.contains("optimizer"));
    assert!(!out.contains("model size"));
    assert_eq!(
        sh.run(&["prompt", "research-ideas", "--problem", "p", "--dimensions", dims.to_str().unwrap(), "--select", "loss"])
            .code,
        EXIT_USAGE
    );
}

#[test]
fn template_overrides_replace_the_bundled_text() {
    let sh = Shell::new();
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("search-query.txt"), "---\nQuery for {{problem}} using {{dimensions}}{{#if keywords}} and {{#each keywords sep=\" \"}}{{value}}{{/each}}{{/if}}\n").unwrap();
    let templates = dir.path().to_str().unwrap();
    let out = sh.ok(&[
        "--templates",
        templates,
        "prompt",
        "search-query",
        "--problem",
        "p",
        "--dimensions",
        golden::golden_dir().join("dimensions.json").to_str().unwrap(),
        "--keyword",
        "llm",
    ]);
    assert!(out.starts_with("Query for p using "), "{out}");
    assert!(out.ends_with(" and llm\n"), "{out}");
    let shown = sh.ok(&["--templates", templates, "tasks", "show", "search-query"]);
    assert!(shown.contains("template authored"));
}

#[test]
fn tasks_list_and_show() {
    let sh = Shell::new();
    let listed = sh.ok(&["tasks", "list"]);
    assert_eq!(listed.lines().count(), 11);
    let json: serde_json::Value = serde_json::from_str(&sh.ok(&["tasks", "list", "--json"])).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 11);
    assert!(sh.ok(&["tasks", "show", "compare-contexts"]).contains("contexts (required, min 2)"));
}

#[test]
fn workspace_lifecycle() {
    let sh = Shell::new();
    sh.ok(&["ws", "new", "a", "--problem", "first"]);
    assert_eq!(sh.run(&["ws", "new", "a"]).code, EXIT_FAILURE);
    sh.ok(&["ws", "new", "b"]);
    assert_eq!(sh.ok(&["ws", "list"]), "a\nb\n");
    assert!(sh.ok(&["ws", "show", "a"]).contains("problem    first"));
    let json: serde_json::Value = serde_json::from_str(&sh.ok(&["ws", "show", "a", "--json"])).unwrap();
    assert_eq!(json["id"], "a");
    sh.ok(&["ws", "delete", "a"]);
    assert_eq!(sh.ok(&["ws", "list"]), "b\n");
}

#[test]
fn chat_sends_the_prompt_and_ingests_the_reply() {
    let mut sh = Shell::new();
    sh.ok(&["ws", "new", "c", "--problem", golden::GPT_PROBLEM]);
    let stub = StubServer::start(vec![StubReply::completion(&corpus::fixture(golden::GPT_FIXTURE))]);
    sh.env.insert("RA_API_BASE".into(), stub.base_url());
    sh.env.insert("RA_API_KEY".into(), "test-key".into());
    sh.env.insert("RA_MODEL".into(), "stub-model".into());

    let mut args = vec!["chat", "compare-contexts", "--ws", "c"];
    let ctx = context_args();
    args.extend(ctx.iter().map(String::as_str));
    let o = sh.run(&args);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stderr.contains("ingested 7 dimensions x 3 columns"), "{}", o.stderr);

    let requests = stub.requests();
    assert_eq!(requests.len(), 1);
    assert!(requests[0].contains("stub-model"));
    let ws = workspace::load_id(sh.root(), "c").unwrap();
    assert_eq!(ws.comparison.columns().len(), 3);
    assert_eq!(ws.log.last().unwrap().transport.as_ref().unwrap().model, "stub-model");
}

#[test]
fn chat_without_configuration_is_an_error() {
    let sh = Shell::new();
    sh.ok(&["ws", "new", "c"]);
    let o = sh.run(&["chat", "dimensions-for-problem", "--ws", "c"]);
    assert_eq!(o.code, EXIT_FAILURE);
    assert!(o.stderr.contains("RA_API_BASE"), "{}", o.stderr);
}

#[test]
fn serve_answers_on_loopback() {
    let sh = Shell::new();
    let mut child = Command::new(env!("CARGO_BIN_EXE_ra-forge"))
        .args(["--home", sh.root().to_str().unwrap(), "serve", "--port", "0"])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on http://").expect(&line).to_string();

    let mut stream = TcpStream::connect(&addr).unwrap();
    write!(stream, "GET /api/tasks HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut reply = String::new();
    stream.read_to_string(&mut reply).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(reply.starts_with("HTTP/1.1 200"), "{reply}");
    assert!(reply.contains("compare-contexts"));
}

#[test]
fn every_scenario_is_reachable() {
    let sh = Shell::new();
    let dims = golden::golden_dir().join("dimensions.json").display().to_string();
    let ctx = context_args();
    for scenario in Catalog::builtin().list_scenarios() {
        let mut args = vec!["prompt", scenario.id.slug()];
        for spec in &scenario.slots {
            match spec.name {
                SlotName::Problem => args.extend(["--problem", golden::GPT_PROBLEM]),
                SlotName::Contexts => args.extend(ctx.iter().map(String::as_str)),
                SlotName::ContextSingle => args.extend(ctx[..4].iter().map(String::as_str)),
                SlotName::Entities => args.extend(["--entity", "GPT-2", "--entity", "GPT-3"]),
                SlotName::Dimensions => args.extend(["--dimensions", &dims]),
                SlotName::CallObjectives => args.extend(["--call-objectives", "Open research data"]),
                SlotName::Keywords => args.extend(["--keyword", "transformer"]),
            }
        }
        let out = sh.ok(&args);
        assert!(!out.contains("{{"), "{}: {out}", scenario.id.slug());
    }
}

#[test]
fn json_output_is_stable_and_parseable() {
    let sh = Shell::new().with_gpt();
    for args in [
        &["tasks", "list", "--json"][..],
        &["tasks", "show", "blog-post", "--json"],
        &["ws", "list", "--json"],
        &["ws", "show", "g", "--json"],
    ] {
        let first = sh.ok(args);
        serde_json::from_str::<serde_json::Value>(&first).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert_eq!(sh.ok(args), first, "{args:?}");
    }
    assert_eq!(sh.ok(&["ws", "list", "--json"]), "[\"g\"]\n");
}
