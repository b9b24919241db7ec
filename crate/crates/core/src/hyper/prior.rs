use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::gp::HyperParams;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Named hyperparameter prior families.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorKind {
    /// `LN(0, 3)` (mean and variance of the log) on every scale parameter.
    #[default]
    LogNormalWide,
    /// `LN(0, 1)` on every scale parameter.
    LogNormalNarrow,
    /// `Γ(3, 6)` lengthscales, `Γ(2, 0.15)` outputscale, `Γ(1.1, 0.05)` noise
    /// (shape, rate).
    GammaDefault,
    /// Sparse axis-aligned subspace prior: `τ² ~ HC(0.1)`, `κ_i² ~ HC(1)`,
    /// `ℓ_i = 1/(κ_i τ)`, `σ_f² ~ Γ(2, 0.15)`, `σ_ε² ~ Γ(0.9, 10)`.
    Saas,
}

/// A one-dimensional prior, expressed as a density over the unconstrained
/// coordinate the sampler moves in: `z = log v` for positive parameters
/// (Jacobian included), `z = v` for [`ScalarPrior::Normal`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum ScalarPrior {
    /// `log v ~ N(mu, var)`.
    LogNormal { mu: f64, var: f64 },
    Gamma { shape: f64, rate: f64 },
    HalfCauchy { scale: f64 },
    /// Density on the parameter itself; used for the mean constant.
    Normal { mean: f64, var: f64 },
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl ScalarPrior {
    /// Log density of `z` and its derivative.
    pub fn log_density(&self, z: f64) -> (f64, f64) {
        match *self {
            ScalarPrior::LogNormal { mu: m, var } | ScalarPrior::Normal { mean: m, var } => {
                let d = z - m;
                (-0.5 * d * d / var - 0.5 * (LN_2PI + var.ln()), -d / var)
            }
            ScalarPrior::Gamma { shape, rate } => {
                let v = z.exp();
                (shape * rate.ln() - ln_gamma(shape) + shape * z - rate * v, shape - rate * v)
            }
            ScalarPrior::HalfCauchy { scale } => {
                // p(v) = 2 / (π s (1 + (v/s)²)), times the Jacobian v
                let a = 2.0 * (z - scale.ln());
                let lp = std::f64::consts::LN_2 - std::f64::consts::PI.ln() - scale.ln() - softplus(a) + z;
                (lp, 1.0 - 2.0 * sigmoid(a))
            }
        }
    }

    /// Draw of `z`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ScalarPrior::LogNormal { mu: m, var } | ScalarPrior::Normal { mean: m, var } => {
                let n: f64 = StandardNormal.sample(rng);
                m + var.sqrt() * n
            }
            ScalarPrior::Gamma { shape, rate } => {
                let v: f64 = Gamma::new(shape, 1.0 / rate).expect("valid gamma").sample(rng);
                v.max(1e-300).ln()
            }
            ScalarPrior::HalfCauchy { scale } => {
                let u: f64 = rng.random_range(1e-12..1.0 - 1e-12);
                (scale * (std::f64::consts::PI * (u - 0.5)).tan().abs()).max(1e-300).ln()
            }
        }
    }

    /// Mode of the density over `z`.
    pub fn mode(&self) -> f64 {
        match *self {
            ScalarPrior::LogNormal { mu: m, .. } | ScalarPrior::Normal { mean: m, .. } => m,
            ScalarPrior::Gamma { shape, rate } => (shape / rate).ln(),
            ScalarPrior::HalfCauchy { scale } => scale.ln(),
        }
    }
}

/// Full prior over one GP hyperparameter set of dimension `dim`.
///
/// The unconstrained parameter vector is
/// `[z_ℓ (dim entries), log σ_f², log σ_ε², c]` for the non-hierarchical
/// families and `[log κ_1², …, log κ_D², log τ², log σ_f², log σ_ε², c]`
/// for SAAS, where `ℓ_i = (κ_i² τ²)^(-1/2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorFamily {
    pub kind: PriorKind,
    pub dim: usize,
    /// Prior on each `log ℓ_i` (or each `log κ_i²` for SAAS).
    pub lengthscale: ScalarPrior,
    /// Prior on the global shrinkage `log τ²` (SAAS only).
    pub global_shrinkage: Option<ScalarPrior>,
    pub outputscale: ScalarPrior,
    pub noise: ScalarPrior,
    pub mean: ScalarPrior,
}

impl PriorFamily {
    pub fn new(kind: PriorKind, dim: usize) -> Self {
        let mean = ScalarPrior::Normal { mean: 0.0, var: 1.0 };
        let (lengthscale, global_shrinkage, outputscale, noise) = match kind {
            PriorKind::LogNormalWide => {
                let p = ScalarPrior::LogNormal { mu: 0.0, var: 3.0 };
                (p, None, p, p)
            }
            PriorKind::LogNormalNarrow => {
                let p = ScalarPrior::LogNormal { mu: 0.0, var: 1.0 };
                (p, None, p, p)
            }
            PriorKind::GammaDefault => (
                ScalarPrior::Gamma { shape: 3.0, rate: 6.0 },
                None,
                ScalarPrior::Gamma { shape: 2.0, rate: 0.15 },
                ScalarPrior::Gamma { shape: 1.1, rate: 0.05 },
            ),
            PriorKind::Saas => (
                ScalarPrior::HalfCauchy { scale: 1.0 },
                Some(ScalarPrior::HalfCauchy { scale: 0.1 }),
                ScalarPrior::Gamma { shape: 2.0, rate: 0.15 },
                ScalarPrior::Gamma { shape: 0.9, rate: 10.0 },
            ),
        };
        Self { kind, dim, lengthscale, global_shrinkage, outputscale, noise, mean }
    }

    /// Length of the unconstrained parameter vector.
    pub fn param_dim(&self) -> usize {
        self.dim + 3 + usize::from(self.global_shrinkage.is_some())
    }

    /// The scalar prior governing each coordinate, in order.
    pub fn components(&self) -> Vec<ScalarPrior> {
        let mut c = vec![self.lengthscale; self.dim];
        c.extend(self.global_shrinkage);
        c.extend([self.outputscale, self.noise, self.mean]);
        c
    }

    fn offset(&self) -> usize {
        self.dim + usize::from(self.global_shrinkage.is_some())
    }

    /// Log prior density of `z` and its gradient.
    pub fn log_density(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; z.len()];
        let mut total = 0.0;
        for (i, (p, &zi)) in self.components().iter().zip(z).enumerate() {
            let (lp, d) = p.log_density(zi);
            total += lp;
            grad[i] = d;
        }
        (total, grad)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.components().iter().map(|p| p.sample(rng)).collect()
    }

    pub fn mode(&self) -> Vec<f64> {
        self.components().iter().map(ScalarPrior::mode).collect()
    }

    /// `log ℓ_i` for every input dimension.
    pub fn log_lengthscales(&self, z: &[f64]) -> Vec<f64> {
        match self.global_shrinkage {
            None => z[..self.dim].to_vec(),
            Some(_) => {
                let tau = z[self.dim];
                z[..self.dim].iter().map(|k| -0.5 * (k + tau)).collect()
            }
        }
    }

    /// Maps an unconstrained vector to hyperparameters.
    pub fn to_hyper(&self, z: &[f64]) -> Result<HyperParams> {
        if z.len() != self.param_dim() {
            return Err(Error::DimensionMismatch { expected: self.param_dim(), found: z.len() });
        }
        let o = self.offset();
        HyperParams::new(
            self.log_lengthscales(z).iter().map(|v| v.exp()).collect(),
            z[o].exp(),
            z[o + 1].exp(),
            z[o + 2],
        )
    }

    /// Chain rule from a gradient over `HyperParams::to_log_vector`
    /// coordinates to a gradient over `z`.
    pub fn pull_back_gradient(&self, log_grad: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.param_dim()];
        let o = self.offset();
        match self.global_shrinkage {
            None => g[..self.dim].copy_from_slice(&log_grad[..self.dim]),
            Some(_) => {
                for i in 0..self.dim {
                    g[i] = -0.5 * log_grad[i];
                    g[self.dim] -= 0.5 * log_grad[i];
                }
            }
        }
        g[o..o + 3].copy_from_slice(&log_grad[self.dim..self.dim + 3]);
        g
    }
}
