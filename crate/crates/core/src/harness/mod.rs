//! Configuration-driven experiment runner.
//!
//! A run executes the loop *fit surrogate → select query → observe* for every
//! seed of an [`ExperimentConfig`], writes one CSV per seed and a JSON
//! [`Manifest`] that echoes the full configuration. Re-running a manifest
//! reproduces every CSV byte for byte: all randomness is derived from the
//! seed, and wall-clock times go to separate timing files.

mod output;
mod plot;
mod presets;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acquisition::{select_next, AcqOptSettings, AcquisitionKind, AcquisitionSpec, ModelEnsemble};
use crate::benchmarks::{
    inference_regret, make_task, prediction_metrics, simple_regret, validation_points, MetricRecord, Task, TaskKind,
    TaskOverrides, VALIDATION_SIZE,
};
use crate::error::{Error, Result};
use crate::gp::{denormalize_point, row, Dataset, HyperParams, KernelKind, OutputScaling};
use crate::hyper::{map_estimate, median, nuts_sample, MCMCConfig, PriorFamily, PriorKind};
use crate::qmc::sobol_points;
use crate::rng::{derive_rng, derive_seed};

pub use output::{read_manifest, write_seed_csv, csv_header};
pub use plot::{emit_plots, summarize_metric, MetricCurve};
pub use presets::{bench_suite, Suite};

/// How hyperparameters are inferred at every iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inference {
    /// Fully Bayesian: `mcmc.num_samples` NUTS draws.
    #[default]
    Mcmc,
    /// A single MAP point estimate.
    Map,
}

/// Everything needed to run one experiment; serialized as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Method name used for the output subdirectory and plot legends;
    /// defaults to the acquisition name.
    pub label: Option<String>,
    /// Benchmark name, e.g. `branin-bo` or `gramacy1d`.
    pub task: String,
    pub task_overrides: TaskOverrides,
    pub acquisition: AcquisitionSpec,
    pub prior: PriorKind,
    pub kernel: KernelKind,
    pub inference: Inference,
    /// Restarts for MAP inference.
    pub map_restarts: usize,
    /// Chain settings; the seed field is ignored because every iteration
    /// derives its own chain seed.
    pub mcmc: MCMCConfig,
    pub seeds: Vec<u64>,
    /// Queries after the initial design; defaults to `25 (D + 3)`.
    pub budget: Option<usize>,
    /// Initial Sobol design size; defaults to `max(6, 2D)`.
    pub initial_design: Option<usize>,
    /// Metrics are computed every `metrics_every` queries and always after
    /// the initial design and the final query; `0` means only those two.
    pub metrics_every: usize,
    /// Validation points for the prediction metrics; `0` disables them.
    pub validation_size: usize,
    /// Optimizer for the posterior-mean recommendation behind inference
    /// regret.
    pub recommend: AcqOptSettings,
    /// Seeds run concurrently in this many worker threads.
    pub workers: usize,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            label: None,
            task: "branin-bo".into(),
            task_overrides: TaskOverrides::default(),
            acquisition: AcquisitionSpec::default(),
            prior: PriorKind::default(),
            kernel: KernelKind::default(),
            inference: Inference::default(),
            map_restarts: 8,
            mcmc: MCMCConfig::default(),
            seeds: vec![0],
            budget: None,
            initial_design: None,
            metrics_every: 1,
            validation_size: VALIDATION_SIZE,
            recommend: AcqOptSettings::fine(),
            workers: 1,
            output_dir: PathBuf::from("results"),
        }
    }
}

/// Default query budget `25 |θ|` with `|θ| = D + 3` hyperparameters.
pub fn default_budget(dim: usize) -> usize {
    25 * (dim + 3)
}

/// Default initial design size `max(6, 2D)`.
pub fn default_initial_design(dim: usize) -> usize {
    (2 * dim).max(6)
}

impl ExperimentConfig {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.acquisition.kind.name().to_string())
    }

    /// Directory holding this experiment's CSVs and manifest.
    pub fn run_dir(&self) -> PathBuf {
        self.output_dir.join(self.label())
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidArgument("at least one seed is required".into()));
        }
        if self.budget == Some(0) {
            return Err(Error::InvalidArgument("budget must be at least 1".into()));
        }
        if self.initial_design == Some(0) {
            return Err(Error::InvalidArgument("initial design must contain at least one point".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("at least one worker is required".into()));
        }
        if self.inference == Inference::Map && self.map_restarts == 0 {
            return Err(Error::InvalidArgument("MAP inference needs at least one restart".into()));
        }
        let label = self.label();
        if label.is_empty() || label.contains(['/', '\\']) || label == "." || label == ".." {
            return Err(Error::InvalidArgument(format!("label `{label}` is not a valid directory name")));
        }
        self.acquisition.validate()?;
        self.mcmc.validate()?;
        Ok(())
    }

    /// Copy with the task-dependent defaults filled in, as echoed in the
    /// manifest.
    pub fn resolved(&self, task: &Task) -> Self {
        let dim = task.dim();
        Self {
            label: Some(self.label()),
            budget: Some(self.budget.unwrap_or_else(|| default_budget(dim))),
            initial_design: Some(self.initial_design.unwrap_or_else(|| default_initial_design(dim))),
            ..self.clone()
        }
    }
}

/// Outcome of one seed, as recorded in the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedStatus {
    pub seed: u64,
    pub ok: bool,
    pub error: Option<String>,
    /// CSV file name relative to the run directory.
    pub csv: Option<String>,
    pub rows: usize,
    pub wall_time_s: f64,
}

/// JSON record of a run: version, resolved configuration and per-seed
/// status. Passing a manifest back to [`load_config`] reproduces the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<SeedStatus>,
    pub wall_time_s: f64,
}

impl Manifest {
    pub fn failed_seeds(&self) -> usize {
        self.seeds.iter().filter(|s| !s.ok).count()
    }
}

/// Version string written to manifests: package version plus the source
/// revision when one was supplied at build time.
pub fn version_string() -> String {
    match option_env!("SCOREBO_GIT_REV") {
        Some(rev) => format!("scorebo {}-{rev}", env!("CARGO_PKG_VERSION")),
        None => format!("scorebo {}", env!("CARGO_PKG_VERSION")),
    }
}

/// Reads either a plain configuration file or a manifest (whose `config`
/// field is used).
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("config").is_some() && value.get("version").is_some() {
        let manifest: Manifest = serde_json::from_value(value)?;
        Ok(manifest.config)
    } else {
        Ok(serde_json::from_value(value)?)
    }
}

/// Fitted surrogate for one iteration.
struct Surrogate {
    ensemble: ModelEnsemble,
    scaling: OutputScaling,
    samples: Vec<HyperParams>,
}

fn fit_surrogate(
    cfg: &ExperimentConfig,
    task: &Task,
    points: &[Vec<f64>],
    ys: &[f64],
    seed: u64,
) -> Result<Surrogate> {
    let (dataset, scaling) = Dataset::from_observations(points, ys, &task.bounds)?;
    let prior = PriorFamily::new(cfg.prior, task.dim());
    let samples = match cfg.inference {
        Inference::Mcmc => {
            let mcmc = MCMCConfig { seed: derive_seed(seed, "mcmc", &[]), ..cfg.mcmc };
            nuts_sample(&dataset, &prior, &mcmc, cfg.kernel)?.samples
        }
        Inference::Map => {
            vec![map_estimate(&dataset, &prior, cfg.map_restarts, derive_seed(seed, "map", &[]), cfg.kernel)?]
        }
    };
    let ensemble = ModelEnsemble::fit(&dataset, &samples, cfg.kernel)?;
    Ok(Surrogate { ensemble, scaling, samples })
}

/// Metrics of a fitted surrogate, written into `rec`.
fn record_metrics(
    cfg: &ExperimentConfig,
    task: &Task,
    surrogate: &Surrogate,
    points: &[Vec<f64>],
    validation: &[Vec<f64>],
    seed: u64,
    rec: &mut MetricRecord,
) -> Result<()> {
    if task.optimum.is_some() {
        rec.inference_regret = Some(inference_regret(&surrogate.ensemble, task, &cfg.recommend, seed)?);
        rec.simple_regret = Some(simple_regret(task, points)?);
    }
    if !validation.is_empty() {
        let m = prediction_metrics(&surrogate.ensemble, surrogate.scaling, task, validation)?;
        rec.neg_mll = Some(m.neg_mll);
        rec.rmse = Some(m.rmse);
    }
    let s = &surrogate.samples;
    rec.hp_median_lengthscales = (0..task.dim())
        .map(|d| median(&mut s.iter().map(|t| t.lengthscales[d]).collect::<Vec<_>>()))
        .collect();
    rec.hp_median_outputscale = Some(median(&mut s.iter().map(|t| t.outputscale_var).collect::<Vec<_>>()));
    rec.hp_median_noise = Some(median(&mut s.iter().map(|t| t.noise_var).collect::<Vec<_>>()));
    Ok(())
}

fn blank_record(iteration: usize, point: Vec<f64>, y: f64) -> MetricRecord {
    MetricRecord {
        iteration,
        point,
        y,
        inference_regret: None,
        simple_regret: None,
        neg_mll: None,
        rmse: None,
        hp_median_lengthscales: Vec::new(),
        hp_median_outputscale: None,
        hp_median_noise: None,
        wall_time: 0.0,
    }
}

/// Runs the full loop for one seed and returns one record per observation.
///
/// The initial design rows have iteration 0 and carry the metrics of the
/// surrogate fitted on the whole design; the row of query `t` carries the
/// metrics of the surrogate fitted after observing it. Observation noise and
/// the initial design depend only on the seed, so different acquisition
/// strategies see common random numbers.
pub fn run_seed(cfg: &ExperimentConfig, task: &Task, seed: u64) -> Result<Vec<MetricRecord>> {
    let dim = task.dim();
    let budget = cfg.budget.unwrap_or_else(|| default_budget(dim));
    let n0 = cfg.initial_design.unwrap_or_else(|| default_initial_design(dim));
    let design = sobol_points(n0, dim, derive_seed(seed, "initial-design", &[]));
    let mut points: Vec<Vec<f64>> = (0..n0).map(|i| denormalize_point(&row(&design, i), &task.bounds)).collect();
    let mut ys: Vec<f64> =
        points.iter().enumerate().map(|(i, x)| task.observe(x, &mut derive_rng(seed, "observe", &[i as u64]))).collect();
    let mut records: Vec<MetricRecord> =
        points.iter().zip(&ys).map(|(x, y)| blank_record(0, x.clone(), *y)).collect();
    let validation = if cfg.validation_size > 0 {
        validation_points(task, cfg.validation_size, derive_seed(seed, "validation", &[]))
    } else {
        Vec::new()
    };

    for t in 0..=budget {
        let start = Instant::now();
        let wants_metrics = t == 0 || t == budget || (cfg.metrics_every > 0 && t % cfg.metrics_every == 0);
        let selects = t < budget;
        let needs_fit = wants_metrics || (selects && cfg.acquisition.kind != AcquisitionKind::Random);
        let iter_seed = derive_seed(seed, "iteration", &[t as u64]);
        let surrogate =
            if needs_fit { Some(fit_surrogate(cfg, task, &points, &ys, iter_seed)?) } else { None };
        if let (true, Some(s)) = (wants_metrics, &surrogate) {
            let mut metrics = blank_record(0, Vec::new(), 0.0);
            record_metrics(cfg, task, s, &points, &validation, derive_seed(iter_seed, "recommend", &[]), &mut metrics)?;
            let rows = if t == 0 { 0..n0 } else { records.len() - 1..records.len() };
            for rec in &mut records[rows] {
                let (iteration, point, y, wall_time) = (rec.iteration, std::mem::take(&mut rec.point), rec.y, rec.wall_time);
                *rec = MetricRecord { iteration, point, y, wall_time, ..metrics.clone() };
            }
        }
        if !selects {
            break;
        }
        let u = match (&surrogate, cfg.acquisition.kind) {
            (_, AcquisitionKind::Random) => {
                let mut rng = derive_rng(iter_seed, "random-query", &[]);
                (0..dim).map(|_| rand::Rng::random::<f64>(&mut rng)).collect()
            }
            (Some(s), _) => select_next(&s.ensemble, &cfg.acquisition, derive_seed(iter_seed, "select", &[]))?.point,
            (None, _) => unreachable!("a surrogate is fitted whenever the acquisition needs one"),
        };
        let x = denormalize_point(&u, &task.bounds);
        let y = task.observe(&x, &mut derive_rng(seed, "observe", &[points.len() as u64]));
        points.push(x.clone());
        ys.push(y);
        let mut rec = blank_record(t + 1, x, y);
        rec.wall_time = start.elapsed().as_secs_f64();
        records.push(rec);
    }
    Ok(records)
}

/// Runs every seed of `cfg`, writing `seed_<s>.csv`, `seed_<s>.timing.csv`
/// and `manifest.json` into [`ExperimentConfig::run_dir`]. A failing seed is
/// recorded in the manifest and does not stop the others; only invalid
/// configurations and I/O errors on the manifest are returned as errors.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Manifest> {
    cfg.validate()?;
    let task = make_task(&cfg.task, &cfg.task_overrides)?;
    let cfg = cfg.resolved(&task);
    let dir = cfg.run_dir();
    std::fs::create_dir_all(&dir)?;
    let started = Instant::now();
    let run_one = |&seed: &u64| -> SeedStatus {
        let t0 = Instant::now();
        let result = run_seed(&cfg, &task, seed).and_then(|records| {
            let name = format!("seed_{seed}.csv");
            output::write_seed_csv(&dir.join(&name), &task, seed, &records)?;
            output::write_timing_csv(&dir.join(format!("seed_{seed}.timing.csv")), &records)?;
            Ok((name, records.len()))
        });
        let wall_time_s = t0.elapsed().as_secs_f64();
        match result {
            Ok((csv, rows)) => SeedStatus { seed, ok: true, error: None, csv: Some(csv), rows, wall_time_s },
            Err(e) => SeedStatus { seed, ok: false, error: Some(e.to_string()), csv: None, rows: 0, wall_time_s },
        }
    };
    let seeds: Vec<SeedStatus> = if cfg.workers == 1 {
        cfg.seeds.iter().map(run_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
        pool.install(|| cfg.seeds.par_iter().map(run_one).collect())
    };
    let manifest =
        Manifest { version: version_string(), config: cfg, seeds, wall_time_s: started.elapsed().as_secs_f64() };
    output::write_atomic(&dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    Ok(manifest)
}

/// Whether `task` reports regret columns.
pub fn tracks_regret(task: &Task) -> bool {
    task.kind == TaskKind::Optimization && task.optimum.is_some()
}
