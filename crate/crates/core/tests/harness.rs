//! End-to-end runs of the experiment harness on small budgets.

use std::path::Path;

use scorebo::acquisition::{AcquisitionKind, AcquisitionSpec};
use scorebo::harness::{load_config, run_experiment, ExperimentConfig, Inference};
use scorebo::hyper::MCMCConfig;

fn small(root: &Path, task: &str, kind: AcquisitionKind) -> ExperimentConfig {
    ExperimentConfig {
        task: task.into(),
        acquisition: AcquisitionSpec::of_kind(kind),
        inference: Inference::Map,
        map_restarts: 2,
        mcmc: MCMCConfig { warmup: 16, thinning: 1, num_samples: 4, seed: 0 },
        seeds: vec![0, 1],
        budget: Some(1),
        validation_size: 64,
        output_dir: root.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

fn read_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn budget_of_one_adds_a_single_query_after_the_design() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = run_experiment(&small(dir.path(), "branin-bo", AcquisitionKind::Random)).unwrap();
    assert_eq!(manifest.failed_seeds(), 0);
    let init = manifest.config.initial_design.unwrap();
    for s in &manifest.seeds {
        let (header, rows) = read_rows(&manifest.config.run_dir().join(s.csv.as_ref().unwrap()));
        assert_eq!(rows.len(), init + 1);
        assert!(header.contains(&"inference_regret".to_string()));
        let regret = header.iter().position(|h| h == "inference_regret").unwrap();
        assert!(!rows[init][regret].is_empty());
    }
}

#[test]
fn active_learning_tasks_have_no_regret_columns() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = run_experiment(&small(dir.path(), "gramacy1d", AcquisitionKind::Random)).unwrap();
    let csv = manifest.config.run_dir().join(manifest.seeds[0].csv.as_ref().unwrap());
    let (header, _) = read_rows(&csv);
    assert!(!header.iter().any(|h| h.contains("regret")));
    assert!(header.contains(&"neg_mll".to_string()));
}

#[test]
fn manifest_rerun_reproduces_bytes() {
    let first = tempfile::tempdir().unwrap();
    let manifest = run_experiment(&small(first.path(), "branin-bo", AcquisitionKind::Nei)).unwrap();
    let manifest_path = manifest.config.run_dir().join("manifest.json");
    let mut cfg = load_config(&manifest_path).unwrap();
    let second = tempfile::tempdir().unwrap();
    cfg.output_dir = second.path().to_path_buf();
    let rerun = run_experiment(&cfg).unwrap();
    for (a, b) in manifest.seeds.iter().zip(&rerun.seeds) {
        let a = std::fs::read(manifest.config.run_dir().join(a.csv.as_ref().unwrap())).unwrap();
        let b = std::fs::read(rerun.config.run_dir().join(b.csv.as_ref().unwrap())).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn invalid_configs_are_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path(), "branin-bo", AcquisitionKind::Random);
    cfg.seeds.clear();
    assert!(run_experiment(&cfg).is_err());
    let mut cfg = small(dir.path(), "no-such-task", AcquisitionKind::Random);
    cfg.seeds = vec![0];
    assert!(run_experiment(&cfg).is_err());
}
