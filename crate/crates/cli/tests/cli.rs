//! Command-line behaviour: exit codes, dry runs and plotting.

use std::path::Path;
use std::process::{Command, Output};

fn scorebo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scorebo")).args(args).output().unwrap()
}

fn write_config(dir: &Path, out: &Path) -> String {
    let cfg = serde_json::json!({
        "task": "branin-bo",
        "acquisition": { "kind": "random" },
        "inference": "map",
        "map_restarts": 2,
        "seeds": [0],
        "budget": 2,
        "validation_size": 32,
        "output_dir": out,
    });
    let path = dir.join("config.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_then_plot_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results");
    let config = write_config(dir.path(), &out);
    let run = scorebo(&["run", "--config", &config]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(out.join("random").join("manifest.json").exists());

    let plot = scorebo(&["plot", "--dir", out.to_str().unwrap(), "--metric", "inference_regret"]);
    assert!(plot.status.success(), "{}", String::from_utf8_lossy(&plot.stderr));
    let written = String::from_utf8(plot.stdout).unwrap();
    assert!(Path::new(written.trim()).exists());
}

#[test]
fn bad_config_exits_with_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"task": "branin-bo", "not_a_field": 1}"#).unwrap();
    let out = scorebo(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());

    let missing = scorebo(&["run", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn bench_dry_run_writes_loadable_configs() {
    let dir = tempfile::tempdir().unwrap();
    let out = scorebo(&["bench", "--suite", "al", "--out", dir.path().to_str().unwrap(), "--dry-run"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let listed: Vec<String> = String::from_utf8(out.stdout).unwrap().lines().map(String::from).collect();
    assert!(!listed.is_empty());
    for path in &listed {
        let text = std::fs::read_to_string(path).unwrap();
        let cfg: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(cfg["task"].is_string());
    }
}

#[test]
fn shipped_schema_lists_every_config_field() {
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../../../docs/config.schema.json")).unwrap();
    let documented = schema["properties"].as_object().unwrap();
    let defaults = serde_json::to_value(scorebo::harness::ExperimentConfig::default()).unwrap();
    for field in defaults.as_object().unwrap().keys() {
        assert!(documented.contains_key(field), "schema is missing `{field}`");
    }
    assert_eq!(documented.len(), defaults.as_object().unwrap().len());
}
