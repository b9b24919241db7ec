use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{Error, Result};

/// Across-seed summary of one metric for one method.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricCurve {
    pub method: String,
    /// Number of observations made (1-based CSV row index).
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    /// Standard error of the mean; zero with a single seed.
    pub stderr: Vec<f64>,
}

/// Result CSVs under `dir`, grouped by method. CSVs directly in `dir` are
/// labelled with the directory name; each subdirectory is one method.
fn result_files(dir: &Path) -> Result<BTreeMap<String, Vec<PathBuf>>> {
    let is_result = |p: &Path| {
        p.extension().is_some_and(|e| e == "csv")
            && !p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".timing.csv"))
    };
    let mut groups: BTreeMap<String, Vec<PathBuf>> = BTreeMap::new();
    let own = dir.file_name().and_then(|n| n.to_str()).unwrap_or("results").to_string();
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(&path)?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .filter(|p| is_result(p))
                .collect();
            files.sort();
            if !files.is_empty() {
                let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
                groups.entry(name).or_default().extend(files);
            }
        } else if is_result(&path) {
            groups.entry(own.clone()).or_default().push(path);
        }
    }
    if groups.is_empty() {
        return Err(Error::NoResults(dir.display().to_string()));
    }
    Ok(groups)
}

/// Column `metric` of one CSV; empty cells become `None`.
fn read_column(path: &Path, metric: &str) -> Result<Option<Vec<Option<f64>>>> {
    let mut r = csv::Reader::from_path(path)?;
    let Some(col) = r.headers()?.iter().position(|h| h == metric) else {
        return Ok(None);
    };
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        out.push(rec.get(col).and_then(|v| v.parse::<f64>().ok()));
    }
    Ok(Some(out))
}

/// Mean and standard error of `metric` at every row index across the seeds
/// of each method in `dir`. Rows where no seed has a value are skipped.
pub fn summarize_metric(dir: &Path, metric: &str) -> Result<Vec<MetricCurve>> {
    let mut curves = Vec::new();
    for (method, files) in result_files(dir)? {
        let mut columns = Vec::new();
        for f in &files {
            if let Some(c) = read_column(f, metric)? {
                columns.push(c);
            }
        }
        if columns.is_empty() {
            continue;
        }
        let rows = columns.iter().map(Vec::len).max().unwrap_or(0);
        let mut curve = MetricCurve { method, x: Vec::new(), mean: Vec::new(), stderr: Vec::new() };
        for i in 0..rows {
            let vals: Vec<f64> = columns.iter().filter_map(|c| c.get(i).copied().flatten()).collect();
            if vals.is_empty() {
                continue;
            }
            let k = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / k;
            let stderr = if vals.len() > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt() / k.sqrt()
            } else {
                0.0
            };
            curve.x.push((i + 1) as f64);
            curve.mean.push(mean);
            curve.stderr.push(stderr);
        }
        curves.push(curve);
    }
    if curves.is_empty() {
        return Err(Error::MissingMetric(metric.into()));
    }
    Ok(curves)
}

/// Smallest value drawn on a logarithmic axis.
const LOG_FLOOR: f64 = 1e-12;

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Plot(e.to_string())
}

fn draw<'a, C>(
    chart: &mut ChartContext<'a, SVGBackend<'a>, C>,
    curves: &[MetricCurve],
    transform: impl Fn(f64) -> f64,
) -> Result<()>
where
    C: CoordTranslate<From = (f64, f64)>,
{
    for (i, c) in curves.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        let mut band: Vec<(f64, f64)> =
            c.x.iter().zip(c.mean.iter().zip(&c.stderr)).map(|(x, (m, s))| (*x, transform(m + s))).collect();
        band.extend(c.x.iter().zip(c.mean.iter().zip(&c.stderr)).rev().map(|(x, (m, s))| (*x, transform(m - s))));
        chart.draw_series(std::iter::once(Polygon::new(band, color.mix(0.2).filled()))).map_err(plot_err)?;
        chart
            .draw_series(LineSeries::new(c.x.iter().zip(&c.mean).map(|(x, m)| (*x, transform(*m))), color.stroke_width(2)))
            .map_err(plot_err)?
            .label(c.method.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    Ok(())
}

/// Renders `<dir>/<metric>.svg`: one mean curve with a shaded ±1 standard
/// error band per method. Regret metrics use a logarithmic axis.
pub fn emit_plots(dir: &Path, metric: &str) -> Result<PathBuf> {
    let curves = summarize_metric(dir, metric)?;
    let log_axis = metric.contains("regret");
    let out = dir.join(format!("{metric}.svg"));
    let x_max = curves.iter().flat_map(|c| c.x.iter().copied()).fold(1.0, f64::max);
    let transform = |v: f64| if log_axis { v.max(LOG_FLOOR) } else { v };
    let values = || {
        curves.iter().flat_map(|c| c.mean.iter().zip(&c.stderr).flat_map(|(m, s)| [m - s, m + s])).map(transform)
    };
    let mut lo = values().fold(f64::INFINITY, f64::min);
    let mut hi = values().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Plot(format!("metric `{metric}` has no finite values")));
    }
    if hi <= lo {
        let pad = if log_axis { lo * 0.5 } else { lo.abs().max(1.0) * 0.05 };
        lo -= pad;
        hi += pad;
    }
    let root = SVGBackend::new(out.as_path(), (900, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut builder = ChartBuilder::on(&root);
    builder.caption(metric, ("sans-serif", 22)).margin(16).x_label_area_size(40).y_label_area_size(70);
    if log_axis {
        let mut chart = builder.build_cartesian_2d(1.0..x_max, (lo..hi).log_scale()).map_err(plot_err)?;
        chart.configure_mesh().x_desc("observations").y_desc(metric).draw().map_err(plot_err)?;
        draw(&mut chart, &curves, transform)?;
    } else {
        let mut chart = builder.build_cartesian_2d(1.0..x_max, lo..hi).map_err(plot_err)?;
        chart.configure_mesh().x_desc("observations").y_desc(metric).draw().map_err(plot_err)?;
        draw(&mut chart, &curves, transform)?;
    }
    root.present().map_err(plot_err)?;
    drop(root);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(path: &Path, rows: &[(&str, &str)]) {
        let mut text = String::from("seed,iteration,y,neg_mll\n");
        for (y, m) in rows {
            text.push_str(&format!("0,0,{y},{m}\n"));
        }
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(path, text).unwrap();
    }

    #[test]
    fn single_seed_has_zero_band() {
        let dir = tempfile::tempdir().unwrap();
        write(&dir.path().join("sal/seed_0.csv"), &[("1", "2.5"), ("2", "1.5")]);
        let c = summarize_metric(dir.path(), "neg_mll").unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].mean, vec![2.5, 1.5]);
        assert_eq!(c[0].stderr, vec![0.0, 0.0]);
        assert!(emit_plots(dir.path(), "neg_mll").unwrap().exists());
    }

    #[test]
    fn two_methods_give_two_labelled_curves() {
        let dir = tempfile::tempdir().unwrap();
        write(&dir.path().join("sal/seed_0.csv"), &[("1", "1")]);
        write(&dir.path().join("sal/seed_1.csv"), &[("1", "3")]);
        write(&dir.path().join("random/seed_0.csv"), &[("1", "4")]);
        let c = summarize_metric(dir.path(), "neg_mll").unwrap();
        assert_eq!(c.iter().map(|c| c.method.as_str()).collect::<Vec<_>>(), ["random", "sal"]);
        assert_eq!(c[1].mean, vec![2.0]);
        assert!((c[1].stderr[0] - 1.0).abs() < 1e-12);
        let svg = std::fs::read_to_string(emit_plots(dir.path(), "neg_mll").unwrap()).unwrap();
        let labels: Vec<&str> = svg.lines().map(str::trim).collect();
        assert!(labels.contains(&"sal") && labels.contains(&"random"));
    }

    #[test]
    fn constant_metric_is_flat() {
        let dir = tempfile::tempdir().unwrap();
        for s in 0..3 {
            write(&dir.path().join(format!("bald/seed_{s}.csv")), &[("0", "0.7"), ("0", "0.7"), ("0", "")]);
        }
        let c = &summarize_metric(dir.path(), "neg_mll").unwrap()[0];
        assert_eq!(c.x, vec![1.0, 2.0]);
        assert!(c.mean.iter().all(|m| (m - 0.7).abs() < 1e-15) && c.stderr.iter().all(|s| *s < 1e-15));
        assert!(emit_plots(dir.path(), "neg_mll").is_ok());
    }

    #[test]
    fn missing_metric_and_empty_dir_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(summarize_metric(dir.path(), "rmse"), Err(Error::NoResults(_))));
        write(&dir.path().join("sal/seed_0.csv"), &[("1", "1")]);
        assert!(matches!(summarize_metric(dir.path(), "rmse"), Err(Error::MissingMetric(_))));
    }

    #[test]
    fn regret_plot_uses_log_axis() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("scorebo/seed_0.csv");
        std::fs::create_dir_all(p.parent().unwrap()).unwrap();
        std::fs::write(&p, "seed,iteration,inference_regret\n0,0,1\n0,1,0.01\n0,2,0\n").unwrap();
        assert!(emit_plots(dir.path(), "inference_regret").unwrap().exists());
    }
}
