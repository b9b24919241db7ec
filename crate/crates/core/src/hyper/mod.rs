//! Hyperparameter priors, fully Bayesian sampling of `p(θ | D)` with NUTS,
//! and MAP estimation.

mod nuts;
mod prior;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{log_marginal_likelihood, Dataset, HyperParams, KernelKind};
use crate::rng::{derive_rng, Rng};

pub use nuts::{sample_nuts, LogDensity, NutsOutput, NutsSettings};
pub use prior::{PriorFamily, PriorKind, ScalarPrior};

/// Divergence rate after warmup above which a sample set is flagged.
pub const DIVERGENCE_FLAG_RATE: f64 = 0.25;

/// Settings for one MCMC chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MCMCConfig {
    pub warmup: usize,
    pub thinning: usize,
    pub num_samples: usize,
    pub seed: u64,
}

impl Default for MCMCConfig {
    fn default() -> Self {
        Self { warmup: 256, thinning: 16, num_samples: 16, seed: 0 }
    }
}

impl MCMCConfig {
    pub fn validate(&self) -> Result<()> {
        if self.warmup == 0 || self.thinning == 0 || self.num_samples == 0 {
            return Err(Error::InvalidArgument(format!(
                "MCMC counts must be positive (warmup {}, thinning {}, samples {})",
                self.warmup, self.thinning, self.num_samples
            )));
        }
        Ok(())
    }

    /// Number of transitions the chain performs.
    pub fn total_draws(&self) -> usize {
        self.warmup + self.thinning * self.num_samples
    }
}

/// Sampler health for one chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerDiagnostics {
    pub divergences: usize,
    pub divergence_rate: f64,
    /// Set when the divergence rate exceeds [`DIVERGENCE_FLAG_RATE`].
    pub flagged: bool,
    pub mean_accept: f64,
    pub step_size: f64,
    pub mean_leapfrog_steps: f64,
}

/// `M` posterior hyperparameter draws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperSampleSet {
    pub samples: Vec<HyperParams>,
    /// Draws in the sampler's unconstrained coordinates.
    pub raw: Vec<Vec<f64>>,
    pub prior: PriorKind,
    pub config: MCMCConfig,
    pub diagnostics: SamplerDiagnostics,
}

impl HyperSampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Per-dimension median lengthscale across the set.
    pub fn median_lengthscales(&self) -> Vec<f64> {
        let dim = self.samples.first().map_or(0, HyperParams::dim);
        (0..dim)
            .map(|d| {
                let mut v: Vec<f64> = self.samples.iter().map(|t| t.lengthscales[d]).collect();
                median(&mut v)
            })
            .collect()
    }
}

pub(crate) fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Unnormalized log posterior over a prior family's unconstrained
/// coordinates.
pub struct PosteriorTarget<'a> {
    pub dataset: &'a Dataset,
    pub prior: &'a PriorFamily,
    pub kind: KernelKind,
}

impl LogDensity for PosteriorTarget<'_> {
    fn dim(&self) -> usize {
        self.prior.param_dim()
    }

    fn log_density_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let (v, g) = log_posterior_density(x, self.dataset, self.prior, self.kind);
        grad.copy_from_slice(&g);
        v
    }
}

/// Log marginal likelihood plus log prior (with the Jacobian of the
/// exponential map) at the unconstrained point `z`, and its gradient.
///
/// Points where the GP cannot be fitted evaluate to `-∞` with a zero gradient.
pub fn log_posterior_density(
    z: &[f64],
    dataset: &Dataset,
    prior: &PriorFamily,
    kind: KernelKind,
) -> (f64, Vec<f64>) {
    let fail = || (f64::NEG_INFINITY, vec![0.0; prior.param_dim()]);
    if z.len() != prior.param_dim() || z.iter().any(|v| !v.is_finite()) {
        return fail();
    }
    let (lp, mut grad) = prior.log_density(z);
    if dataset.is_empty() {
        return (lp, grad);
    }
    let Ok(theta) = prior.to_hyper(z) else {
        return fail();
    };
    match log_marginal_likelihood(dataset, &theta, kind) {
        Ok((lml, lml_grad)) if lml.is_finite() => {
            for (g, l) in grad.iter_mut().zip(prior.pull_back_gradient(&lml_grad)) {
                *g += l;
            }
            (lp + lml, grad)
        }
        _ => fail(),
    }
}

fn initial_point(dataset: &Dataset, prior: &PriorFamily, kind: KernelKind, rng: &mut Rng) -> Vec<f64> {
    let mode = prior.mode();
    if log_posterior_density(&mode, dataset, prior, kind).0.is_finite() {
        return mode;
    }
    for _ in 0..100 {
        let z = prior.sample(rng);
        if log_posterior_density(&z, dataset, prior, kind).0.is_finite() {
            return z;
        }
    }
    mode
}

/// Draws `cfg.num_samples` hyperparameter sets from `p(θ | D)` with a single
/// NUTS chain. Deterministic given `cfg.seed`.
pub fn nuts_sample(
    dataset: &Dataset,
    prior: &PriorFamily,
    cfg: &MCMCConfig,
    kind: KernelKind,
) -> Result<HyperSampleSet> {
    cfg.validate()?;
    if prior.dim != dataset.dim() {
        return Err(Error::DimensionMismatch { expected: dataset.dim(), found: prior.dim });
    }
    let mut rng = derive_rng(cfg.seed, "nuts", &[]);
    let init = initial_point(dataset, prior, kind, &mut rng);
    let target = PosteriorTarget { dataset, prior, kind };
    let out = sample_nuts(
        &target,
        &init,
        cfg.warmup,
        cfg.num_samples,
        cfg.thinning,
        &NutsSettings::default(),
        &mut rng,
    );
    let samples = out.draws.iter().map(|z| prior.to_hyper(z)).collect::<Result<Vec<_>>>()?;
    let rate = out.divergence_rate();
    Ok(HyperSampleSet {
        samples,
        raw: out.draws,
        prior: prior.kind,
        config: *cfg,
        diagnostics: SamplerDiagnostics {
            divergences: out.divergences,
            divergence_rate: rate,
            flagged: rate > DIVERGENCE_FLAG_RATE,
            mean_accept: out.mean_accept,
            step_size: out.step_size,
            mean_leapfrog_steps: out.mean_leapfrog_steps,
        },
    })
}

const MAP_MAX_ITERS: usize = 500;
const MAP_GRAD_TOL: f64 = 1e-6;

/// Gradient ascent with an Armijo backtracking line search. Returns the
/// final point and its density; never returns a point worse than `z0`.
fn ascend(target: &PosteriorTarget<'_>, z0: Vec<f64>) -> (Vec<f64>, f64) {
    let mut grad = vec![0.0; z0.len()];
    let mut z = z0;
    let mut f = target.log_density_grad(&z, &mut grad);
    if !f.is_finite() {
        return (z, f);
    }
    let mut step = 1.0;
    let mut trial_grad = vec![0.0; z.len()];
    for _ in 0..MAP_MAX_ITERS {
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        if g2.sqrt() < MAP_GRAD_TOL {
            break;
        }
        let mut accepted = false;
        while step > 1e-14 {
            let trial: Vec<f64> = z.iter().zip(&grad).map(|(z, g)| z + step * g).collect();
            let ft = target.log_density_grad(&trial, &mut trial_grad);
            if ft.is_finite() && ft >= f + 1e-4 * step * g2 {
                z = trial;
                f = ft;
                std::mem::swap(&mut grad, &mut trial_grad);
                accepted = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (z, f)
}

/// Multi-start MAP estimate of the hyperparameters. The first start is the
/// prior mode; the remaining `restarts - 1` are prior draws.
pub fn map_estimate(
    dataset: &Dataset,
    prior: &PriorFamily,
    restarts: usize,
    seed: u64,
    kind: KernelKind,
) -> Result<HyperParams> {
    map_estimate_log(dataset, prior, restarts, seed, kind).and_then(|(z, _)| prior.to_hyper(&z))
}

/// As [`map_estimate`], returning the unconstrained optimum and its density.
pub fn map_estimate_log(
    dataset: &Dataset,
    prior: &PriorFamily,
    restarts: usize,
    seed: u64,
    kind: KernelKind,
) -> Result<(Vec<f64>, f64)> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("map_estimate needs at least one restart".into()));
    }
    if prior.dim != dataset.dim() {
        return Err(Error::DimensionMismatch { expected: dataset.dim(), found: prior.dim });
    }
    let target = PosteriorTarget { dataset, prior, kind };
    let mut rng = derive_rng(seed, "map", &[]);
    let starts: Vec<Vec<f64>> = (0..restarts)
        .map(|r| if r == 0 { prior.mode() } else { prior.sample(&mut rng) })
        .collect();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for z0 in starts {
        let (z, f) = ascend(&target, z0);
        if f.is_finite() && prior.to_hyper(&z).is_ok() && best.as_ref().is_none_or(|(_, bf)| f > *bf) {
            best = Some((z, f));
        }
    }
    best.ok_or(Error::AllRestartsFailed(restarts))
}
