//! Exact Gaussian-process regression on the unit cube.
//!
//! Inputs live in `[0,1]^D` and targets are standardized before fitting;
//! [`Dataset::from_observations`] performs both transforms and returns the
//! [`OutputScaling`] needed to map predictions back.

mod kernel;
mod posterior;
mod truncated;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use kernel::{kernel_matrix, kernel_value, scaled_distance, KernelKind};
pub use posterior::{fit, log_marginal_likelihood, GpPosterior, JITTER_LADDER};
pub use truncated::{std_normal_cdf, std_normal_pdf, truncated_moments, VARIANCE_FLOOR};

pub(crate) use kernel::row;

/// One GP hyperparameter set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub lengthscales: Vec<f64>,
    pub outputscale_var: f64,
    pub noise_var: f64,
    pub mean_const: f64,
}

impl HyperParams {
    pub fn new(
        lengthscales: Vec<f64>,
        outputscale_var: f64,
        noise_var: f64,
        mean_const: f64,
    ) -> Result<Self> {
        let theta = Self { lengthscales, outputscale_var, noise_var, mean_const };
        theta.validate()?;
        Ok(theta)
    }

    /// Unit lengthscales and variances, zero mean.
    pub fn unit(dim: usize) -> Self {
        Self { lengthscales: vec![1.0; dim], outputscale_var: 1.0, noise_var: 1.0, mean_const: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    /// Lengthscales and outputscale must be positive and finite. The noise
    /// variance may be zero, which requests noiseless interpolation.
    pub fn validate(&self) -> Result<()> {
        if self.lengthscales.is_empty() {
            return Err(Error::InvalidHyperParams("no lengthscales".into()));
        }
        if let Some(l) = self.lengthscales.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidHyperParams(format!("lengthscale {l}")));
        }
        if !(self.outputscale_var.is_finite() && self.outputscale_var > 0.0) {
            return Err(Error::InvalidHyperParams(format!(
                "outputscale variance {}",
                self.outputscale_var
            )));
        }
        if !(self.noise_var.is_finite() && self.noise_var >= 0.0) {
            return Err(Error::InvalidHyperParams(format!("noise variance {}", self.noise_var)));
        }
        if !self.mean_const.is_finite() {
            return Err(Error::InvalidHyperParams(format!("mean constant {}", self.mean_const)));
        }
        Ok(())
    }

    /// `[log ℓ_1, …, log ℓ_D, log σ_f², log σ_ε², c]`.
    pub fn to_log_vector(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.lengthscales.iter().map(|l| l.ln()).collect();
        v.push(self.outputscale_var.ln());
        v.push(self.noise_var.ln());
        v.push(self.mean_const);
        v
    }

    pub fn from_log_vector(v: &[f64]) -> Result<Self> {
        if v.len() < 4 {
            return Err(Error::InvalidHyperParams(format!("log vector of length {}", v.len())));
        }
        let dim = v.len() - 3;
        Self::new(
            v[..dim].iter().map(|z| z.exp()).collect(),
            v[dim].exp(),
            v[dim + 1].exp(),
            v[dim + 2],
        )
    }
}

/// Training data in normalized coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    inputs: DMatrix<f64>,
    targets: DVector<f64>,
    bounds: Vec<(f64, f64)>,
}

/// Affine map between standardized and original outputs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputScaling {
    pub mean: f64,
    pub std: f64,
}

impl OutputScaling {
    pub const IDENTITY: Self = Self { mean: 0.0, std: 1.0 };

    pub fn to_original(&self, g: GaussianPredict) -> GaussianPredict {
        GaussianPredict {
            mean: g.mean * self.std + self.mean,
            var: g.var * self.std * self.std,
            includes_noise: g.includes_noise,
        }
    }

    pub fn standardize(&self, y: f64) -> f64 {
        (y - self.mean) / self.std
    }
}

impl Dataset {
    /// `inputs` is n×D with coordinates in `[0,1]`; `bounds` are the original
    /// per-dimension box the inputs were normalized from.
    pub fn new(inputs: DMatrix<f64>, targets: DVector<f64>, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if inputs.nrows() != targets.len() {
            return Err(Error::InvalidDataset(format!(
                "{} inputs but {} targets",
                inputs.nrows(),
                targets.len()
            )));
        }
        if inputs.ncols() != bounds.len() {
            return Err(Error::DimensionMismatch { expected: bounds.len(), found: inputs.ncols() });
        }
        if inputs.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidDataset("inputs outside the unit cube".into()));
        }
        if targets.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite target".into()));
        }
        Ok(Self { inputs, targets, bounds })
    }

    /// Dataset already on the unit cube, with unit bounds.
    pub fn unit(inputs: DMatrix<f64>, targets: DVector<f64>) -> Result<Self> {
        let dim = inputs.ncols();
        Self::new(inputs, targets, vec![(0.0, 1.0); dim])
    }

    pub fn empty(dim: usize) -> Self {
        Self { inputs: DMatrix::zeros(0, dim), targets: DVector::zeros(0), bounds: vec![(0.0, 1.0); dim] }
    }

    /// Min-max normalizes `points` (original coordinates, one per row) with
    /// `bounds` and standardizes `y` to zero mean and unit variance.
    pub fn from_observations(
        points: &[Vec<f64>],
        y: &[f64],
        bounds: &[(f64, f64)],
    ) -> Result<(Self, OutputScaling)> {
        let dim = bounds.len();
        let n = points.len();
        if y.len() != n {
            return Err(Error::InvalidDataset(format!("{n} points but {} targets", y.len())));
        }
        let mut inputs = DMatrix::zeros(n, dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
            }
            for d in 0..dim {
                inputs[(i, d)] = normalize_coord(p[d], bounds[d]);
            }
        }
        let scaling = standardization(y);
        let targets = DVector::from_iterator(n, y.iter().map(|&v| scaling.standardize(v)));
        Ok((Self::new(inputs, targets, bounds.to_vec())?, scaling))
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn inputs(&self) -> &DMatrix<f64> {
        &self.inputs
    }

    pub fn targets(&self) -> &DVector<f64> {
        &self.targets
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        row(&self.inputs, i)
    }

    /// Maps a unit-cube point back to original coordinates.
    pub fn denormalize(&self, x: &[f64]) -> Vec<f64> {
        denormalize_point(x, &self.bounds)
    }
}

pub fn normalize_coord(v: f64, (lo, hi): (f64, f64)) -> f64 {
    ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
}

pub fn denormalize_point(x: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    x.iter().zip(bounds).map(|(u, (lo, hi))| lo + u * (hi - lo)).collect()
}

fn standardization(y: &[f64]) -> OutputScaling {
    if y.is_empty() {
        return OutputScaling::IDENTITY;
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    OutputScaling { mean, std: if std > 1e-12 { std } else { 1.0 } }
}

/// Pointwise Gaussian predictive distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianPredict {
    pub mean: f64,
    pub var: f64,
    pub includes_noise: bool,
}

impl GaussianPredict {
    pub fn new(mean: f64, var: f64) -> Self {
        Self { mean, var: var.max(0.0), includes_noise: false }
    }

    pub fn std(&self) -> f64 {
        self.var.sqrt()
    }

    pub fn with_noise(self, noise_var: f64) -> Self {
        Self { mean: self.mean, var: self.var + noise_var, includes_noise: true }
    }

    pub fn log_density(&self, y: f64) -> f64 {
        let r = y - self.mean;
        -0.5 * ((2.0 * std::f64::consts::PI * self.var).ln() + r * r / self.var)
    }

    pub fn entropy(&self) -> f64 {
        0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * self.var).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_vector_round_trip() {
        let t = HyperParams::new(vec![0.2, 3.0], 1.5, 0.01, -0.3).unwrap();
        let back = HyperParams::from_log_vector(&t.to_log_vector()).unwrap();
        for (a, b) in t.lengthscales.iter().zip(&back.lengthscales) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((t.noise_var - back.noise_var).abs() < 1e-16);
        assert_eq!(t.mean_const, back.mean_const);
    }

    #[test]
    fn rejects_nonpositive_scales() {
        assert!(HyperParams::new(vec![0.0], 1.0, 0.1, 0.0).is_err());
        assert!(HyperParams::new(vec![1.0], -1.0, 0.1, 0.0).is_err());
        assert!(HyperParams::new(vec![1.0], 1.0, -0.1, 0.0).is_err());
        assert!(HyperParams::new(vec![f64::NAN], 1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn from_observations_normalizes_and_standardizes() {
        let pts = vec![vec![-5.0, 0.0], vec![10.0, 15.0], vec![2.5, 7.5]];
        let y = [1.0, 3.0, 5.0];
        let (ds, scale) = Dataset::from_observations(&pts, &y, &[(-5.0, 10.0), (0.0, 15.0)]).unwrap();
        assert_eq!(ds.point(0), vec![0.0, 0.0]);
        assert_eq!(ds.point(1), vec![1.0, 1.0]);
        assert_eq!(ds.point(2), vec![0.5, 0.5]);
        assert!((ds.targets().mean()).abs() < 1e-15);
        assert!((ds.targets().variance() - 1.0).abs() < 1e-12);
        assert!((scale.mean - 3.0).abs() < 1e-15);
        assert_eq!(ds.denormalize(&[0.5, 0.5]), vec![2.5, 7.5]);
    }

    #[test]
    fn rejects_inputs_outside_unit_cube() {
        let x = DMatrix::from_row_slice(1, 1, &[1.5]);
        assert!(Dataset::unit(x, DVector::from_vec(vec![0.0])).is_err());
    }
}
