mod common;

use std::path::Path;
use std::process::Command as Process;

use clap::Parser;
use serde_json::Value;

use apitask_cli::{run, Cli, CliError};

fn cli(args: &[&str]) -> Cli {
    Cli::try_parse_from(std::iter::once("apitask").chain(args.iter().copied())).unwrap()
}

fn exec(args: &[&str]) -> Result<String, CliError> {
    let mut out = Vec::new();
    run(&cli(args), &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

fn path(p: &Path) -> String {
    p.display().to_string()
}

#[test]
fn all_builds_deterministically() {
    let config = path(&common::mini_config());
    let dir = tempfile::tempdir().unwrap();
    let out = exec(&["--config", &config, "--out-dir", &path(dir.path()), "all"]).unwrap();
    for stage in ["[build-api]", "[build-task]", "[train-embed]", "[fuse]", "[enrich]"] {
        assert!(out.contains(stage), "{out}");
    }
    assert!(out.contains("edges.TaskAlign: 19"), "{out}");
    let first = std::fs::read(dir.path().join("graph.kg")).unwrap();
    assert_eq!(first, std::fs::read(common::mini_build().join("graph.kg")).unwrap());

    exec(&["--config", &config, "--out-dir", &path(dir.path()), "enrich"]).unwrap();
    assert_eq!(first, std::fs::read(dir.path().join("graph.kg")).unwrap());
}

#[test]
fn stage_errors_carry_exit_codes() {
    let config = path(&common::mini_config());
    let dir = tempfile::tempdir().unwrap();
    let err = exec(&["--config", &config, "--out-dir", &path(dir.path()), "fuse"]).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(err.to_string().contains("run build-api first"), "{err}");

    let err = exec(&["--config", "/nonexistent/apitask.toml", "all"]).unwrap_err();
    assert_eq!(err.exit_code(), 1);

    let corpus = tempfile::tempdir().unwrap();
    for d in ["api", "tutorials"] {
        std::fs::create_dir(corpus.path().join(d)).unwrap();
    }
    let cfg = corpus.path().join("apitask.toml");
    std::fs::write(&cfg, "[corpus]\napi_ref = \"api\"\ntutorials = \"tutorials\"\n").unwrap();
    let err = exec(&["--config", &path(&cfg), "build-api"]).unwrap_err();
    assert_eq!(err.exit_code(), 2, "{err}");
}

#[test]
fn seed_override_changes_the_config_hash() {
    let config = common::mini_config();
    let base = cli(&["--config", &path(&config), "all"]).global.load_config().unwrap();
    let seeded = cli(&["--config", &path(&config), "--seed", "99", "all"]).global.load_config().unwrap();
    assert_eq!(seeded.file.embedding.seed, 99);
    assert_ne!(base.config_hash(), seeded.config_hash());
}

fn index_args() -> Vec<String> {
    let dir = common::mini_build();
    vec![
        "--snapshot".into(),
        path(&dir.join("graph.kg")),
        "--vectors".into(),
        path(&dir.join("vectors.txt")),
    ]
}

fn query(extra: &[&str]) -> Result<String, CliError> {
    let mut args = vec!["--config", "/nonexistent/apitask.toml", "query"];
    let index = index_args();
    args.extend(index.iter().map(String::as_str));
    args.extend(extra);
    exec(&args)
}

#[test]
fn text_queries_render_in_both_formats() {
    let q = "how to insert an item in List with add()";
    let human = query(&[q]).unwrap();
    assert!(human.contains("best task: Insert an element into a List [task:lists:insert-an-element-into-a-list]"), "{human}");
    assert!(human.contains("java.util.List.add(int,E)"), "{human}");

    let machine = query(&["--format", "machine", q]).unwrap();
    let v: Value = serde_json::from_str(&machine).unwrap();
    assert_eq!(v["best_task"]["task"]["id"], "task:lists:insert-an-element-into-a-list");
    assert_eq!(machine, query(&["--format", "machine", q]).unwrap());

    let err = query(&["???"]).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn code_queries_read_files() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("q.java");
    std::fs::write(&file, "ResultSet rs = stmt.executeQuery(sql);\nStatement stmt = conn.createStatement();\n").unwrap();
    let out = query(&["--code", "--file", &path(&file)]).unwrap();
    assert!(out.contains("FunctionReplace: java.sql.Statement.executeUpdate(String) -> java.sql.Statement.executeQuery(String)"), "{out}");

    std::fs::write(&file, "no calls here").unwrap();
    let err = query(&["--code", "--file", &path(&file)]).unwrap_err();
    assert!(matches!(err, CliError::Search(apitask_kg::search::SearchError::NoApiFound)));
}

#[test]
fn missing_snapshot_is_reported() {
    let err = exec(&["--config", "/nonexistent/apitask.toml", "query", "--snapshot", "/nonexistent/graph.kg", "--vectors", "/x", "add()"]).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(err.to_string().contains("/nonexistent/graph.kg not found"), "{err}");
    let err = exec(&["--config", "/nonexistent/apitask.toml", "query", "add()"]).unwrap_err();
    assert!(err.to_string().contains("--snapshot"), "{err}");
}

#[test]
fn stats_of_mini_empty_and_corrupt_snapshots() {
    let snapshot = path(&common::mini_build().join("graph.kg"));
    let v: Value = serde_json::from_str(&exec(&["stats", &snapshot, "--format", "machine"]).unwrap()).unwrap();
    assert_eq!(v["api_entities"], 54);
    assert_eq!(v["task_entities"], 16);
    assert_eq!(v["fusion_links"], 31);
    assert_eq!(v["task_semantic"]["TaskAlign"], 19);
    assert_eq!(v["api_semantic"]["FunctionReplace"], 2);
    let human = exec(&["stats", &snapshot]).unwrap();
    assert!(human.contains("  hasMethod\t23"), "{human}");

    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.kg");
    std::fs::write(&empty, apitask_kg::graphstore::KnowledgeGraph::new().to_snapshot_string()).unwrap();
    let v: Value = serde_json::from_str(&exec(&["stats", &path(&empty), "--format", "machine"]).unwrap()).unwrap();
    assert_eq!(v["api_entities"], 0);
    assert_eq!(v["fusion_links"], 0);
    assert!(v["edges"].as_object().unwrap().values().all(|n| n == 0));

    let corrupt = dir.path().join("corrupt.kg");
    std::fs::write(&corrupt, "not a snapshot\n").unwrap();
    assert_eq!(exec(&["stats", &path(&corrupt)]).unwrap_err().exit_code(), 2);
    assert_eq!(exec(&["stats", "/nonexistent.kg"]).unwrap_err().exit_code(), 1);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_apitask");
    let help = Process::new(bin).arg("--help").output().unwrap();
    assert!(help.status.success());
    let text = String::from_utf8_lossy(&help.stdout);
    for cmd in ["build-api", "build-task", "train-embed", "fuse", "enrich", "all", "query", "stats", "serve"] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
    let missing = Process::new(bin).args(["--config", "/nonexistent/apitask.toml", "all"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error: "));
}
