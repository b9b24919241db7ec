use serde::{Deserialize, Serialize};

use super::OptimumSample;
use crate::error::{Error, Result};
use crate::gp::{kernel_value, truncated_moments, GaussianPredict, GpPosterior};

/// Which part of a sampled optimum a conditional model uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    /// Observe `f(x*) = f*` and truncate the latent at `f*`.
    #[default]
    Joint,
    /// Observe `f(x*)` at the model's own latent mean, without truncation.
    LocationOnly,
    /// Truncate the latent at `f*` only.
    ValueOnly,
}

/// Predictive model of `y` conditioned on a sampled optimum.
///
/// Predictions reuse the parent posterior's factorization: conditioning on
/// one noiseless observation is a rank-1 update of the latent mean and
/// variance, so each query costs one triangular solve against the parent.
#[derive(Clone, Debug)]
pub struct ConditionedModel<'a> {
    parent: &'a GpPosterior,
    optimum: OptimumSample,
    conditioning: Conditioning,
    /// Latent value observed at `x*`.
    observed: f64,
    /// Parent latent mean at `x*`.
    mean_star: f64,
    /// `L⁻¹ k(X, x*)` under the parent factorization.
    whitened_star: Vec<f64>,
    /// Parent latent variance at `x*`.
    schur: f64,
    /// Explicit fantasized posterior when the rank-1 update is degenerate.
    fallback: Option<GpPosterior>,
}

/// Rank-1 updates below this fraction of `σ_f²` use the refitted posterior.
const DEGENERATE_SCHUR: f64 = 1e-12;

/// Conditions `posterior` on `opt` as described by `conditioning`.
pub fn condition_on_optimum<'a>(
    posterior: &'a GpPosterior,
    opt: &OptimumSample,
    conditioning: Conditioning,
) -> Result<ConditionedModel<'a>> {
    if opt.x_star.len() != posterior.dim() {
        return Err(Error::DimensionMismatch { expected: posterior.dim(), found: opt.x_star.len() });
    }
    if !opt.f_star.is_finite() && conditioning != Conditioning::LocationOnly {
        return Err(Error::InvalidArgument(format!("optimum value {}", opt.f_star)));
    }
    let (latent, whitened_star) = posterior.latent_with_whitened(&opt.x_star);
    let observed = match conditioning {
        Conditioning::Joint => opt.f_star,
        Conditioning::LocationOnly => latent.mean,
        Conditioning::ValueOnly => f64::NAN,
    };
    let sf2 = posterior.theta().outputscale_var;
    let fallback = if conditioning != Conditioning::ValueOnly && latent.var <= DEGENERATE_SCHUR * sf2 {
        Some(posterior.fantasize(&opt.x_star, observed)?)
    } else {
        None
    };
    Ok(ConditionedModel {
        parent: posterior,
        optimum: opt.clone(),
        conditioning,
        observed,
        mean_star: latent.mean,
        whitened_star,
        schur: latent.var,
        fallback,
    })
}

impl ConditionedModel<'_> {
    pub fn optimum(&self) -> &OptimumSample {
        &self.optimum
    }

    pub fn conditioning(&self) -> Conditioning {
        self.conditioning
    }

    pub fn parent(&self) -> &GpPosterior {
        self.parent
    }

    /// Latent predictive after the fantasy observation, before truncation.
    pub fn fantasized_latent(&self, x: &[f64]) -> GaussianPredict {
        let (latent, whitened) = self.parent.latent_with_whitened(x);
        self.fantasized_latent_from(x, latent, &whitened)
    }

    /// As [`fantasized_latent`](Self::fantasized_latent), reusing the
    /// parent latent predictive and `L⁻¹ k(X, x)` at `x`.
    pub fn fantasized_latent_from(&self, x: &[f64], latent: GaussianPredict, whitened: &[f64]) -> GaussianPredict {
        if self.conditioning == Conditioning::ValueOnly {
            return latent;
        }
        if let Some(post) = &self.fallback {
            return post.latent(x);
        }
        let k = kernel_value(x, &self.optimum.x_star, self.parent.theta(), self.parent.kind());
        let cov = k - whitened.iter().zip(&self.whitened_star).map(|(a, b)| a * b).sum::<f64>();
        let gain = cov / self.schur;
        GaussianPredict::new(latent.mean + gain * (self.observed - self.mean_star), latent.var - gain * cov)
    }

    /// Noise-inclusive predictive of `y` at `x`.
    pub fn predict(&self, x: &[f64]) -> GaussianPredict {
        let (latent, whitened) = self.parent.latent_with_whitened(x);
        self.predict_from(x, latent, &whitened)
    }

    /// As [`predict`](Self::predict), reusing parent quantities at `x`.
    pub fn predict_from(&self, x: &[f64], latent: GaussianPredict, whitened: &[f64]) -> GaussianPredict {
        let f = self.fantasized_latent_from(x, latent, whitened);
        let f = match self.conditioning {
            Conditioning::LocationOnly => f,
            Conditioning::Joint | Conditioning::ValueOnly => truncated_moments(f, self.optimum.f_star),
        };
        f.with_noise(self.parent.theta().noise_var)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{fit, Dataset, HyperParams, KernelKind, VARIANCE_FLOOR};
    use nalgebra::{DMatrix, DVector};

    fn posterior() -> GpPosterior {
        let x = DMatrix::from_row_slice(4, 2, &[0.1, 0.2, 0.4, 0.9, 0.7, 0.3, 0.95, 0.8]);
        let ds = Dataset::unit(x, DVector::from_vec(vec![0.5, -1.0, 1.2, 0.1])).unwrap();
        fit(&ds, &HyperParams::new(vec![0.3, 0.5], 1.0, 0.05, 0.1).unwrap(), KernelKind::Matern52).unwrap()
    }

    fn opt() -> OptimumSample {
        OptimumSample { x_star: vec![0.6, 0.35], f_star: 1.6 }
    }

    #[test]
    fn rank_one_update_matches_explicit_fantasy() {
        let post = posterior();
        let model = condition_on_optimum(&post, &opt(), Conditioning::Joint).unwrap();
        let fant = post.fantasize(&opt().x_star, opt().f_star).unwrap();
        for x in [[0.0, 0.0], [0.5, 0.5], [0.61, 0.36], [0.2, 0.9]] {
            let a = model.fantasized_latent(&x);
            let b = fant.latent(&x);
            assert!((a.mean - b.mean).abs() < 1e-10 && (a.var - b.var).abs() < 1e-10);
            let t = truncated_moments(b, 1.6).with_noise(0.05);
            let p = model.predict(&x);
            assert!((p.mean - t.mean).abs() < 1e-10 && (p.var - t.var).abs() < 1e-10);
        }
    }

    #[test]
    fn fixed_point_at_optimum() {
        let post = posterior();
        let model = condition_on_optimum(&post, &opt(), Conditioning::Joint).unwrap();
        let f = model.fantasized_latent(&opt().x_star);
        assert!((f.mean - 1.6).abs() < 1e-9);
        assert!(f.var < 1e-9);
        let p = model.predict(&opt().x_star);
        assert!((p.mean - 1.6).abs() < 1e-6);
        assert!((p.var - (VARIANCE_FLOOR + 0.05)).abs() < 1e-8);
    }

    #[test]
    fn location_only_keeps_mean_and_shrinks_variance() {
        let post = posterior();
        let model = condition_on_optimum(&post, &opt(), Conditioning::LocationOnly).unwrap();
        for x in [[0.3, 0.3], [0.55, 0.4]] {
            let a = post.predict_point(&x, true);
            let b = model.predict(&x);
            assert!((a.mean - b.mean).abs() < 1e-10);
            assert!(b.var <= a.var);
        }
    }

    #[test]
    fn value_only_is_plain_truncation() {
        let post = posterior();
        let model = condition_on_optimum(&post, &opt(), Conditioning::ValueOnly).unwrap();
        let x = [0.3, 0.6];
        let t = truncated_moments(post.latent(&x), 1.6).with_noise(0.05);
        assert_eq!(model.predict(&x), t);
    }

    #[test]
    fn mean_pushed_down_far_from_data() {
        let post = posterior();
        let o = OptimumSample { x_star: vec![0.5, 0.5], f_star: 1.0 };
        let model = condition_on_optimum(&post, &o, Conditioning::Joint).unwrap();
        let x = [0.0, 1.0];
        assert!(model.predict(&x).mean < post.predict_point(&x, true).mean);
    }

    #[test]
    fn degenerate_update_falls_back_to_refit() {
        let x = DMatrix::from_column_slice(2, 1, &[0.2, 0.7]);
        let ds = Dataset::unit(x, DVector::from_vec(vec![0.0, 1.0])).unwrap();
        let post = fit(&ds, &HyperParams::new(vec![0.3], 1.0, 0.0, 0.0).unwrap(), KernelKind::Matern52).unwrap();
        let o = OptimumSample { x_star: vec![0.7], f_star: 1.0 };
        let model = condition_on_optimum(&post, &o, Conditioning::Joint).unwrap();
        assert!(model.fallback.as_ref().is_some_and(GpPosterior::refit_fallback));
        assert!(model.predict(&[0.4]).mean.is_finite());
    }
}
