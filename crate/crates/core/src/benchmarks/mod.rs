//! Synthetic benchmark tasks and evaluation metrics.

pub mod functions;
mod metrics;

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{denormalize_point, fit, Dataset, HyperParams, KernelKind};
use crate::optimum::{draw_pathwise_sample, maximize_surface, MaximizeSettings, PathSample, Surface};
use crate::rng::Rng;

pub use metrics::{
    inference_regret, prediction_metrics, recommend, simple_regret, validation_points, MetricRecord,
    PredictionMetrics, VALIDATION_SIZE,
};

/// Whether a task is used for active learning (model quality) or
/// optimization (regret).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    ActiveLearning,
    Optimization,
}

/// Known global maximum of a task, in its maximization form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnownOptimum {
    pub value: f64,
    /// Location in original coordinates.
    pub location: Vec<f64>,
}

#[derive(Clone, Debug)]
enum Objective {
    Analytic(fn(&[f64]) -> f64),
    /// A fixed GP function draw on the unit cube.
    Sample(Arc<PathSample>),
}

/// A noisy black-box function on a box domain. Values are in maximization
/// form: minimization benchmarks are negated.
#[derive(Clone, Debug)]
pub struct Task {
    pub name: String,
    pub kind: TaskKind,
    pub bounds: Vec<(f64, f64)>,
    pub noise_std: f64,
    pub optimum: Option<KnownOptimum>,
    /// Generating hyperparameters, for tasks drawn from a GP.
    pub ground_truth: Option<HyperParams>,
    objective: Objective,
    /// Leading coordinates the objective reads; the rest are inert.
    active_dims: usize,
    sign: f64,
}

/// Optional changes applied on top of a registry entry.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskOverrides {
    pub noise_std: Option<f64>,
    /// Total dimension after appending inert dummy coordinates.
    pub embed_dim: Option<usize>,
}

impl Task {
    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn active_dims(&self) -> usize {
        self.active_dims
    }

    /// Noiseless value at `x` (original coordinates).
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match &self.objective {
            Objective::Analytic(f) => self.sign * f(&x[..self.active_dims]),
            Objective::Sample(s) => {
                let u: Vec<f64> = x[..self.active_dims]
                    .iter()
                    .zip(&self.bounds)
                    .map(|(v, (lo, hi))| (v - lo) / (hi - lo))
                    .collect();
                self.sign * s.value(&u)
            }
        }
    }

    /// Noiseless value at a unit-cube point.
    pub fn evaluate_unit(&self, u: &[f64]) -> f64 {
        self.evaluate(&denormalize_point(u, &self.bounds))
    }

    /// Noisy observation `f(x) + σ_ε ε`.
    pub fn observe(&self, x: &[f64], rng: &mut Rng) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.evaluate(x) + self.noise_std * z
    }

    /// Appends inert coordinates up to `dim`, reusing the first bound.
    fn embed(mut self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::InvalidArgument(format!(
                "cannot embed a {}-dimensional task in {dim} dimensions",
                self.dim()
            )));
        }
        let fill = self.bounds[0];
        self.bounds.resize(dim, fill);
        if let Some(o) = &mut self.optimum {
            o.location.resize(dim, 0.5 * (fill.0 + fill.1));
        }
        self.name = format!("{}-embed{dim}", self.name);
        Ok(self)
    }

    fn apply(mut self, overrides: &TaskOverrides) -> Result<Self> {
        if let Some(s) = overrides.noise_std {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::InvalidArgument(format!("noise std {s}")));
            }
            self.noise_std = s;
        }
        match overrides.embed_dim {
            Some(d) => self.embed(d),
            None => Ok(self),
        }
    }
}

struct Entry {
    name: &'static str,
    f: fn(&[f64]) -> f64,
    bounds: &'static [(f64, f64)],
    /// Noise standard deviation in the active-learning suite.
    al_noise: Option<f64>,
    /// Noise standard deviation in the optimization suite.
    bo_noise: Option<f64>,
    /// Minimum of the raw function and its location.
    minimum: Option<(f64, &'static [f64])>,
}

const BO_NOISE: f64 = 0.5;
const ROSENBROCK_NOISE: f64 = 2.5;
const ACKLEY_BOUND: f64 = 32.768;

const REGISTRY: &[Entry] = &[
    Entry {
        name: "gramacy1d",
        f: functions::gramacy1d,
        bounds: &[(0.5, 2.5)],
        al_noise: Some(0.1),
        bo_noise: None,
        minimum: None,
    },
    Entry { name: "higdon", f: functions::higdon, bounds: &[(0.0, 20.0)], al_noise: Some(0.1), bo_noise: None, minimum: None },
    Entry {
        name: "gramacy2d",
        f: functions::gramacy2d,
        bounds: &[(-2.0, 6.0), (-2.0, 6.0)],
        al_noise: Some(0.05),
        bo_noise: None,
        minimum: None,
    },
    Entry {
        name: "branin",
        f: functions::branin,
        bounds: &[(-5.0, 10.0), (0.0, 15.0)],
        al_noise: Some(11.32),
        bo_noise: Some(BO_NOISE),
        minimum: Some((0.397_887_357_729_738_2, &[-PI, 12.275])),
    },
    Entry {
        name: "ishigami",
        f: functions::ishigami,
        bounds: &[(-PI, PI), (-PI, PI), (-PI, PI)],
        al_noise: Some(0.187),
        bo_noise: None,
        minimum: None,
    },
    Entry {
        name: "hartmann3",
        f: functions::hartmann3,
        bounds: &[(0.0, 1.0); 3],
        al_noise: None,
        bo_noise: Some(BO_NOISE),
        minimum: Some((-3.862_782_147_820_756, &[0.114_614, 0.555_649, 0.852_547])),
    },
    Entry {
        name: "hartmann4",
        f: functions::hartmann4,
        bounds: &[(0.0, 1.0); 4],
        al_noise: None,
        bo_noise: Some(BO_NOISE),
        minimum: Some((functions::HARTMANN4_MIN, &functions::HARTMANN4_ARGMIN)),
    },
    Entry {
        name: "hartmann6",
        f: functions::hartmann6,
        bounds: &[(0.0, 1.0); 6],
        al_noise: Some(0.0192),
        bo_noise: Some(BO_NOISE),
        minimum: Some((-3.322_368_011_415_515, &[0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573])),
    },
    Entry {
        name: "rosenbrock2",
        f: functions::rosenbrock,
        bounds: &[(-1.5, 1.5); 2],
        al_noise: None,
        bo_noise: Some(ROSENBROCK_NOISE),
        minimum: Some((0.0, &[1.0, 1.0])),
    },
    Entry {
        name: "rosenbrock4",
        f: functions::rosenbrock,
        bounds: &[(-1.5, 1.5); 4],
        al_noise: None,
        bo_noise: Some(ROSENBROCK_NOISE),
        minimum: Some((0.0, &[1.0; 4])),
    },
    Entry {
        name: "ackley",
        f: functions::ackley,
        bounds: &[(-ACKLEY_BOUND, ACKLEY_BOUND); 4],
        al_noise: None,
        bo_noise: Some(BO_NOISE),
        minimum: Some((0.0, &[0.0; 4])),
    },
];

/// Dimension of the embedded high-dimensional variants.
pub const EMBEDDED_DIM: usize = 25;

/// Names accepted by [`make_task`], without suffixes.
pub fn task_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|e| e.name).collect()
}

/// Looks up a benchmark by name.
///
/// Names are case-insensitive and may end in `-al` or `-bo` to pick the
/// active-learning or optimization noise level; without a suffix the
/// optimization setting is used when the function has one. A trailing
/// `-embedded` appends inert dimensions up to [`EMBEDDED_DIM`]. `gp-sample`
/// (optionally `gp-sample-<seed>`) gives the 8D GP-sample task.
pub fn make_task(name: &str, overrides: &TaskOverrides) -> Result<Task> {
    let lower = name.to_ascii_lowercase();
    if let Some(rest) = lower.strip_prefix("gp-sample") {
        let seed = match rest.strip_prefix('-') {
            Some(s) => s.parse().map_err(|_| Error::UnknownTask(name.into()))?,
            None if rest.is_empty() => 0,
            None => return Err(Error::UnknownTask(name.into())),
        };
        return gp_sample_task(seed, &GpSampleParams::default())?.apply(overrides);
    }
    let (base, embedded) = match lower.strip_suffix("-embedded") {
        Some(b) => (b, true),
        None => (lower.as_str(), false),
    };
    let (base, mode) = if let Some(b) = base.strip_suffix("-al") {
        (b, Some(TaskKind::ActiveLearning))
    } else if let Some(b) = base.strip_suffix("-bo") {
        (b, Some(TaskKind::Optimization))
    } else {
        (base, None)
    };
    let entry = REGISTRY.iter().find(|e| e.name == base).ok_or_else(|| Error::UnknownTask(name.into()))?;
    let kind = match mode {
        Some(k) => k,
        None if entry.bo_noise.is_some() => TaskKind::Optimization,
        None => TaskKind::ActiveLearning,
    };
    let noise = match kind {
        TaskKind::ActiveLearning => entry.al_noise,
        TaskKind::Optimization => entry.bo_noise,
    }
    .ok_or_else(|| Error::UnknownTask(name.into()))?;
    let sign = if kind == TaskKind::Optimization { -1.0 } else { 1.0 };
    let optimum = entry
        .minimum
        .filter(|_| kind == TaskKind::Optimization)
        .map(|(v, loc)| KnownOptimum { value: -v, location: loc.to_vec() });
    let suffix = if kind == TaskKind::Optimization { "bo" } else { "al" };
    let task = Task {
        name: format!("{}-{suffix}", entry.name),
        kind,
        bounds: entry.bounds.to_vec(),
        noise_std: noise,
        optimum,
        ground_truth: None,
        objective: Objective::Analytic(entry.f),
        active_dims: entry.bounds.len(),
        sign,
    };
    let task = if embedded { task.embed(EMBEDDED_DIM)? } else { task };
    task.apply(overrides)
}

/// Ground truth for the GP-sample task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpSampleParams {
    pub theta: HyperParams,
    pub kernel: KernelKind,
    pub features: usize,
}

impl Default for GpSampleParams {
    fn default() -> Self {
        let exponents = [-1.0, -0.5, -0.5, 0.0, 0.0, 0.0, 1.5, 1.5];
        Self {
            theta: HyperParams {
                lengthscales: exponents.iter().map(|e: &f64| 10f64.powf(*e)).collect(),
                outputscale_var: 1.0,
                noise_var: 0.1,
                mean_const: 0.0,
            },
            kernel: KernelKind::Matern52,
            features: 2048,
        }
    }
}

/// A fixed random-feature draw from a GP prior on `[0,1]^D`, observed with
/// the prior's noise variance. Its maximum is located numerically.
pub fn gp_sample_task(seed: u64, params: &GpSampleParams) -> Result<Task> {
    params.theta.validate()?;
    let dim = params.theta.dim();
    let prior = fit(&Dataset::empty(dim), &params.theta, params.kernel)?;
    let sample = draw_pathwise_sample(&prior, params.features, seed)?;
    let search = MaximizeSettings { starts: 4096, refine: 16, steps: 200 };
    let (location, value) = maximize_surface(&sample, &search, seed ^ 0x0f7)?;
    Ok(Task {
        name: format!("gp-sample-{seed}"),
        kind: TaskKind::Optimization,
        bounds: vec![(0.0, 1.0); dim],
        noise_std: params.theta.noise_var.sqrt(),
        optimum: Some(KnownOptimum { value, location }),
        ground_truth: Some(params.theta.clone()),
        objective: Objective::Sample(Arc::new(sample)),
        active_dims: dim,
        sign: 1.0,
    })
}

/// Uniform point in the task's original coordinates.
pub fn uniform_point(task: &Task, rng: &mut Rng) -> Vec<f64> {
    task.bounds.iter().map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect()
}
