use serde::{Deserialize, Serialize};

use super::Task;
use crate::acquisition::{optimize_acquisition, AcqOptSettings, ModelEnsemble};
use crate::distances::MixturePredict;
use crate::error::{Error, Result};
use crate::gp::{denormalize_point, normalize_coord, OutputScaling};
use crate::qmc::sobol_points;

/// Size of the validation set used for prediction metrics.
pub const VALIDATION_SIZE: usize = 1000;

/// Everything recorded after one iteration of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub iteration: usize,
    /// Queried point in original coordinates.
    pub point: Vec<f64>,
    /// Noisy observation at `point`.
    pub y: f64,
    pub inference_regret: Option<f64>,
    pub simple_regret: Option<f64>,
    pub neg_mll: Option<f64>,
    pub rmse: Option<f64>,
    /// Posterior medians of each lengthscale, in unit-cube coordinates;
    /// empty when no surrogate was fitted for this record.
    pub hp_median_lengthscales: Vec<f64>,
    /// Posterior median outputscale variance, in standardized output units.
    pub hp_median_outputscale: Option<f64>,
    /// Posterior median noise variance, in standardized output units.
    pub hp_median_noise: Option<f64>,
    /// Seconds spent on the iteration; kept out of the CSV output so that
    /// result files are reproducible.
    #[serde(skip)]
    pub wall_time: f64,
}

/// Mixture-mean maximizer in original coordinates.
pub fn recommend(ens: &ModelEnsemble, settings: &AcqOptSettings, seed: u64) -> Result<Vec<f64>> {
    let (u, _) = optimize_acquisition(|x| ens.mean_latent(x), ens.dim(), settings, seed)?;
    Ok(denormalize_point(&u, ens.dataset().bounds()))
}

/// `f(x_opt) − f(argmax_x μ(x))` on the noiseless objective, clamped at 0.
pub fn inference_regret(ens: &ModelEnsemble, task: &Task, settings: &AcqOptSettings, seed: u64) -> Result<f64> {
    let opt = task.optimum.as_ref().ok_or_else(|| Error::UnknownOptimum(task.name.clone()))?;
    let x = recommend(ens, settings, seed)?;
    Ok((opt.value - task.evaluate(&x)).max(0.0))
}

/// `f(x_opt) − max_i f(x_i)` over the queried points, clamped at 0.
pub fn simple_regret(task: &Task, queried: &[Vec<f64>]) -> Result<f64> {
    let opt = task.optimum.as_ref().ok_or_else(|| Error::UnknownOptimum(task.name.clone()))?;
    let best = queried.iter().map(|x| task.evaluate(x)).fold(f64::NEG_INFINITY, f64::max);
    Ok((opt.value - best).max(0.0))
}

/// Scrambled-Sobol validation points in original coordinates.
pub fn validation_points(task: &Task, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let u = sobol_points(count, task.dim(), seed);
    (0..count).map(|i| denormalize_point(&crate::gp::row(&u, i), &task.bounds)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionMetrics {
    /// Negative mean log density of the noiseless targets under the
    /// noise-inclusive marginal predictive.
    pub neg_mll: f64,
    pub rmse: f64,
}

/// Validation metrics of the ensemble marginal in original output units.
pub fn prediction_metrics(
    ens: &ModelEnsemble,
    scaling: OutputScaling,
    task: &Task,
    points: &[Vec<f64>],
) -> Result<PredictionMetrics> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty validation set".into()));
    }
    let bounds = ens.dataset().bounds().to_vec();
    let (mut nll, mut se) = (0.0, 0.0);
    for p in points {
        let u: Vec<f64> = p.iter().zip(&bounds).map(|(v, b)| normalize_coord(*v, *b)).collect();
        let comps = ens.models().iter().map(|m| scaling.to_original(m.predict_point(&u, true))).collect();
        let mix = MixturePredict::new(comps)?;
        let target = task.evaluate(p);
        nll -= mix.log_pdf(target);
        se += (mix.mean() - target).powi(2);
    }
    let n = points.len() as f64;
    Ok(PredictionMetrics { neg_mll: nll / n, rmse: (se / n).sqrt() })
}
