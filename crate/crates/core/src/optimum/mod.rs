//! Posterior function samples, their maximizers, and GP posteriors
//! conditioned on sampled optima.

mod conditional;
mod pathwise;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::GpPosterior;
use crate::qmc::sobol_points;
use crate::rng::derive_seed;

pub use conditional::{condition_on_optimum, Conditioning, ConditionedModel};
pub use pathwise::{draw_pathwise_sample, PathSample};

/// Random features per function sample used by default.
pub const DEFAULT_FEATURES: usize = 8192;

/// A differentiable function on `[0,1]^D`.
pub trait Surface {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    /// Value at `x`; writes the gradient into `grad`.
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

/// Global optimum of one function sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimumSample {
    pub x_star: Vec<f64>,
    pub f_star: f64,
}

/// Multi-start settings for maximizing a [`Surface`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaximizeSettings {
    /// Quasi-random candidate starts.
    pub starts: usize,
    /// Best starts refined by gradient ascent.
    pub refine: usize,
    /// Gradient-ascent iterations per refined start.
    pub steps: usize,
}

impl Default for MaximizeSettings {
    fn default() -> Self {
        Self { starts: 256, refine: 8, steps: 50 }
    }
}

/// Initial move length of the ascent, in unit-cube coordinates.
const INITIAL_STEP: f64 = 0.05;
const MIN_STEP: f64 = 1e-10;

fn project(x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
}

/// Projected gradient ascent with an adaptive, backtracked step length.
/// The returned value is never below the starting value.
fn ascend<S: Surface + ?Sized>(surface: &S, start: Vec<f64>, steps: usize) -> (Vec<f64>, f64) {
    let dim = surface.dim();
    let mut x = start;
    let mut grad = vec![0.0; dim];
    let mut f = surface.value_grad(&x, &mut grad);
    let mut trial_grad = vec![0.0; dim];
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    let mut step = if norm > 0.0 { INITIAL_STEP / norm } else { 0.0 };
    for _ in 0..steps {
        if step * grad.iter().map(|g| g * g).sum::<f64>().sqrt() < MIN_STEP {
            break;
        }
        let mut improved = false;
        while step > 0.0 {
            let mut trial: Vec<f64> = x.iter().zip(&grad).map(|(x, g)| x + step * g).collect();
            project(&mut trial);
            let moved: f64 = trial.iter().zip(&x).zip(&grad).map(|((t, x), g)| (t - x) * g).sum();
            if moved <= 0.0 {
                break;
            }
            let ft = surface.value_grad(&trial, &mut trial_grad);
            if ft >= f + 1e-4 * moved {
                x = trial;
                f = ft;
                std::mem::swap(&mut grad, &mut trial_grad);
                step *= 1.5;
                improved = true;
                break;
            }
            step *= 0.5;
            if step * grad.iter().map(|g| g * g).sum::<f64>().sqrt() < MIN_STEP {
                break;
            }
        }
        if !improved {
            break;
        }
    }
    (x, f)
}

/// Maximizes `surface` over the unit cube: scores `settings.starts`
/// scrambled-Sobol points, then refines the best `settings.refine` of them by
/// projected gradient ascent.
pub fn maximize_surface<S: Surface + ?Sized>(
    surface: &S,
    settings: &MaximizeSettings,
    seed: u64,
) -> Result<(Vec<f64>, f64)> {
    if settings.starts == 0 || settings.refine == 0 {
        return Err(Error::InvalidArgument("maximization needs at least one start".into()));
    }
    let dim = surface.dim();
    let pts = sobol_points(settings.starts, dim, seed);
    let mut scored: Vec<(f64, Vec<f64>)> = (0..settings.starts)
        .map(|i| {
            let x: Vec<f64> = pts.row(i).iter().copied().collect();
            (surface.value(&x), x)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored.truncate(settings.refine);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for (_, x0) in scored {
        let (x, f) = ascend(surface, x0, settings.steps);
        if f.is_finite() && best.as_ref().is_none_or(|(_, bf)| f > *bf) {
            best = Some((x, f));
        }
    }
    best.ok_or(Error::AllRestartsFailed(settings.refine))
}

/// Maximizes a function sample; `f_star` is the sample's value at `x_star`.
pub fn maximize_sample(sample: &PathSample, settings: &MaximizeSettings, seed: u64) -> Result<OptimumSample> {
    let (x_star, f_star) = maximize_surface(sample, settings, seed)?;
    Ok(OptimumSample { x_star, f_star })
}

/// Draws `count` function samples from `posterior` and returns their optima.
/// Sample `i` uses seeds derived from `(seed, i)`.
pub fn sample_optima(
    posterior: &GpPosterior,
    count: usize,
    features: usize,
    settings: &MaximizeSettings,
    seed: u64,
) -> Result<Vec<OptimumSample>> {
    (0..count as u64)
        .map(|i| {
            let sample = draw_pathwise_sample(posterior, features, derive_seed(seed, "path", &[i]))?;
            maximize_sample(&sample, settings, derive_seed(seed, "maximize", &[i]))
        })
        .collect()
}
