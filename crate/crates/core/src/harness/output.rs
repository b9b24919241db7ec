use std::io::Write as _;
use std::path::Path;

use super::{tracks_regret, Manifest};
use crate::benchmarks::{MetricRecord, Task};
use crate::error::Result;

/// Writes `bytes` to a temporary sibling and renames it into place, so a
/// crashed run never leaves a truncated file behind.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Column names of a result CSV for `task`. Regret columns are present only
/// for tasks with a known optimum.
pub fn csv_header(task: &Task) -> Vec<String> {
    let mut h = vec!["seed".to_string(), "iteration".to_string()];
    h.extend((0..task.dim()).map(|d| format!("x_{d}")));
    h.push("y".into());
    if tracks_regret(task) {
        h.push("inference_regret".into());
        h.push("simple_regret".into());
    }
    h.push("neg_mll".into());
    h.push("rmse".into());
    h.extend((0..task.dim()).map(|d| format!("hp_median_lengthscale_{d}")));
    h.push("hp_median_outputscale".into());
    h.push("hp_median_noise".into());
    h
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes one seed's records. Floats use the shortest representation that
/// round-trips, so identical runs give identical bytes.
pub fn write_seed_csv(path: &Path, task: &Task, seed: u64, records: &[MetricRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(csv_header(task))?;
    let regret = tracks_regret(task);
    for r in records {
        let mut row = vec![seed.to_string(), r.iteration.to_string()];
        row.extend(r.point.iter().map(f64::to_string));
        row.push(r.y.to_string());
        if regret {
            row.push(opt(r.inference_regret));
            row.push(opt(r.simple_regret));
        }
        row.push(opt(r.neg_mll));
        row.push(opt(r.rmse));
        if r.hp_median_lengthscales.is_empty() {
            row.extend(std::iter::repeat_n(String::new(), task.dim()));
        } else {
            row.extend(r.hp_median_lengthscales.iter().map(f64::to_string));
        }
        row.push(opt(r.hp_median_outputscale));
        row.push(opt(r.hp_median_noise));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    write_atomic(path, &bytes)
}

/// Per-row wall-clock seconds, kept apart from the reproducible CSV.
pub(crate) fn write_timing_csv(path: &Path, records: &[MetricRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["row", "iteration", "wall_time_s"])?;
    for (i, r) in records.iter().enumerate() {
        w.write_record([i.to_string(), r.iteration.to_string(), r.wall_time.to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    write_atomic(path, &bytes)
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{make_task, TaskOverrides};

    fn record(i: usize) -> MetricRecord {
        MetricRecord {
            iteration: i,
            point: vec![0.1, 0.2],
            y: -1.5,
            inference_regret: Some(0.25),
            simple_regret: None,
            neg_mll: Some(1.0 / 3.0),
            rmse: Some(2.0),
            hp_median_lengthscales: vec![0.5, 0.75],
            hp_median_outputscale: Some(1.0),
            hp_median_noise: Some(0.01),
            wall_time: 0.123,
        }
    }

    #[test]
    fn csv_rows_match_header() {
        let dir = tempfile::tempdir().unwrap();
        let task = make_task("branin-bo", &TaskOverrides::default()).unwrap();
        let path = dir.path().join("s.csv");
        write_seed_csv(&path, &task, 7, &[record(0), record(1)]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "seed,iteration,x_0,x_1,y,inference_regret,simple_regret,neg_mll,rmse,\
             hp_median_lengthscale_0,hp_median_lengthscale_1,hp_median_outputscale,hp_median_noise"
        );
        assert_eq!(lines[2], "7,1,0.1,0.2,-1.5,0.25,,0.3333333333333333,2,0.5,0.75,1,0.01");
        assert!(!text.contains("0.123"));
        assert!(!dir.path().join("s.csv.tmp").exists());
    }

    #[test]
    fn active_learning_tasks_have_no_regret_columns() {
        let task = make_task("gramacy1d", &TaskOverrides::default()).unwrap();
        let h = csv_header(&task);
        assert!(!h.iter().any(|c| c.contains("regret")));
        assert!(h.contains(&"neg_mll".to_string()));
    }
}
