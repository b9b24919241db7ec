use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::HyperParams;
use crate::error::{Error, Result};

const SQRT5: f64 = 2.236_067_977_499_79;

/// Radial form of a stationary ARD kernel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    #[default]
    Matern52,
    SquaredExponential,
}

impl KernelKind {
    /// Unit-variance correlation at scaled distance `r`.
    #[inline]
    pub fn correlation(self, r: f64) -> f64 {
        match self {
            KernelKind::Matern52 => {
                let s = SQRT5 * r;
                (1.0 + s + s * s / 3.0) * (-s).exp()
            }
            KernelKind::SquaredExponential => (-0.5 * r * r).exp(),
        }
    }

    /// `-(1/r) d corr/dr`, which is finite at `r = 0`.
    ///
    /// The derivative of the kernel with respect to `log ℓ_d` is this value
    /// times `σ_f² (x_d - x'_d)² / ℓ_d²`, and its gradient with respect to
    /// `x_d` is minus this value times `σ_f² (x_d - x'_d) / ℓ_d²`.
    #[inline]
    pub fn radial_slope(self, r: f64) -> f64 {
        match self {
            KernelKind::Matern52 => {
                let s = SQRT5 * r;
                (5.0 / 3.0) * (1.0 + s) * (-s).exp()
            }
            KernelKind::SquaredExponential => (-0.5 * r * r).exp(),
        }
    }
}

impl KernelKind {
    /// [`correlation`](Self::correlation) and
    /// [`radial_slope`](Self::radial_slope) sharing one exponential.
    #[inline]
    pub fn correlation_and_slope(self, r: f64) -> (f64, f64) {
        match self {
            KernelKind::Matern52 => {
                let s = SQRT5 * r;
                let e = (-s).exp();
                ((1.0 + s + s * s / 3.0) * e, (5.0 / 3.0) * (1.0 + s) * e)
            }
            KernelKind::SquaredExponential => {
                let e = (-0.5 * r * r).exp();
                (e, e)
            }
        }
    }
}

/// Scaled ARD distance `sqrt(Σ (a_d - b_d)² / ℓ_d²)`.
#[inline]
pub fn scaled_distance(a: &[f64], b: &[f64], lengthscales: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(lengthscales)
        .map(|((x, y), l)| {
            let d = (x - y) / l;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Kernel value between two points.
#[inline]
pub fn kernel_value(a: &[f64], b: &[f64], theta: &HyperParams, kind: KernelKind) -> f64 {
    theta.outputscale_var * kind.correlation(scaled_distance(a, b, &theta.lengthscales))
}

pub(crate) fn row(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
    (0..m.ncols()).map(|d| m[(i, d)]).collect()
}

/// Cross-covariance matrix between the rows of `x` and the rows of `x2`.
pub fn kernel_matrix(
    x: &DMatrix<f64>,
    x2: &DMatrix<f64>,
    theta: &HyperParams,
    kind: KernelKind,
) -> Result<DMatrix<f64>> {
    theta.validate()?;
    let dim = theta.dim();
    for m in [x, x2] {
        if m.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: m.ncols() });
        }
    }
    let rows: Vec<Vec<f64>> = (0..x.nrows()).map(|i| row(x, i)).collect();
    let cols: Vec<Vec<f64>> = (0..x2.nrows()).map(|j| row(x2, j)).collect();
    Ok(DMatrix::from_fn(x.nrows(), x2.nrows(), |i, j| {
        kernel_value(&rows[i], &cols[j], theta, kind)
    }))
}
