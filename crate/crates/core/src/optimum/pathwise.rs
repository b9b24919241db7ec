use rand_distr::{ChiSquared, Distribution, StandardNormal, Uniform};

use super::Surface;
use crate::error::{Error, Result};
use crate::gp::{scaled_distance, GpPosterior, KernelKind};
use crate::rng::rng_from_seed;

/// Degrees of freedom of the Matérn-5/2 spectral density (Student-t, 2ν).
const MATERN_DOF: f64 = 5.0;

/// One function draw from a GP posterior: a random-Fourier-feature prior
/// sample plus an exact pathwise update through the training data,
///
/// `f(x) = φ(x)ᵀw + c + k(x, X)(K + Σ)⁻¹(y − c − Φw − ε)`.
#[derive(Clone, Debug)]
pub struct PathSample {
    dim: usize,
    /// F×D frequencies, already divided by the lengthscales, row-major.
    omega: Vec<f64>,
    phase: Vec<f64>,
    /// Feature weights premultiplied by `sqrt(2σ_f²/F)`.
    weights: Vec<f64>,
    mean_const: f64,
    kind: KernelKind,
    lengthscales: Vec<f64>,
    outputscale_var: f64,
    train_x: Vec<Vec<f64>>,
    update: Vec<f64>,
}

impl PathSample {
    pub fn num_features(&self) -> usize {
        self.phase.len()
    }

    /// Random-feature part `φ(x)ᵀw` and, when requested, its gradient.
    fn prior_part(&self, x: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let mut total = 0.0;
        for (j, (b, w)) in self.phase.iter().zip(&self.weights).enumerate() {
            let om = &self.omega[j * self.dim..(j + 1) * self.dim];
            let arg = om.iter().zip(x).map(|(o, x)| o * x).sum::<f64>() + b;
            match grad.as_deref_mut() {
                None => total += w * arg.cos(),
                Some(g) => {
                    let (sin, cos) = arg.sin_cos();
                    total += w * cos;
                    g.iter_mut().zip(om).for_each(|(g, o)| *g -= w * sin * o);
                }
            }
        }
        total
    }

    fn update_part(&self, x: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let mut total = 0.0;
        for (xi, v) in self.train_x.iter().zip(&self.update) {
            let r = scaled_distance(x, xi, &self.lengthscales);
            total += v * self.outputscale_var * self.kind.correlation(r);
            if let Some(g) = grad.as_deref_mut() {
                // ∂k/∂x_d = -σ_f² s(r) (x_d - x'_d)/ℓ_d² with s the radial slope
                let s = -v * self.outputscale_var * self.kind.radial_slope(r);
                for d in 0..self.dim {
                    g[d] += s * (x[d] - xi[d]) / (self.lengthscales[d] * self.lengthscales[d]);
                }
            }
        }
        total
    }
}

impl Surface for PathSample {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.mean_const + self.prior_part(x, None) + self.update_part(x, None)
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        self.mean_const + self.prior_part(x, Some(grad)) + self.update_part(x, Some(grad))
    }
}

/// Draws one posterior function sample with `features` random features.
pub fn draw_pathwise_sample(posterior: &GpPosterior, features: usize, seed: u64) -> Result<PathSample> {
    if features == 0 {
        return Err(Error::InvalidArgument("at least one random feature is required".into()));
    }
    let theta = posterior.theta();
    let dim = posterior.dim();
    let mut rng = rng_from_seed(seed);
    let chi = ChiSquared::new(MATERN_DOF).expect("positive degrees of freedom");
    let mut omega = Vec::with_capacity(features * dim);
    for _ in 0..features {
        let scale = match posterior.kind() {
            KernelKind::Matern52 => (MATERN_DOF / chi.sample(&mut rng)).sqrt(),
            KernelKind::SquaredExponential => 1.0,
        };
        for l in &theta.lengthscales {
            let z: f64 = StandardNormal.sample(&mut rng);
            omega.push(z * scale / l);
        }
    }
    let two_pi = Uniform::new(0.0, 2.0 * std::f64::consts::PI).expect("valid range");
    let phase: Vec<f64> = (0..features).map(|_| two_pi.sample(&mut rng)).collect();
    let amplitude = (2.0 * theta.outputscale_var / features as f64).sqrt();
    let weights: Vec<f64> = (0..features)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            amplitude * z
        })
        .collect();
    let mut sample = PathSample {
        dim,
        omega,
        phase,
        weights,
        mean_const: theta.mean_const,
        kind: posterior.kind(),
        lengthscales: theta.lengthscales.clone(),
        outputscale_var: theta.outputscale_var,
        train_x: posterior.train_inputs().to_vec(),
        update: Vec::new(),
    };
    if posterior.num_train() > 0 {
        let resid: Vec<f64> = posterior
            .train_inputs()
            .iter()
            .zip(posterior.train_targets().iter())
            .zip(posterior.point_noise().iter())
            .map(|((x, y), noise)| {
                let eps: f64 = StandardNormal.sample(&mut rng);
                y - theta.mean_const - sample.prior_part(x, None) - noise.sqrt() * eps
            })
            .collect();
        sample.update = posterior.solve(&resid);
    }
    Ok(sample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{fit, Dataset, HyperParams};
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn feature_average_recovers_kernel() {
        let theta = HyperParams::new(vec![0.3], 1.0, 0.1, 0.0).unwrap();
        for kind in [KernelKind::Matern52, KernelKind::SquaredExponential] {
            let post = fit(&Dataset::empty(1), &theta, kind).unwrap();
            let s = draw_pathwise_sample(&post, 200_000, 1).unwrap();
            for &r in &[0.0, 0.1, 0.3, 0.6] {
                let mc: f64 = (0..s.num_features()).map(|j| (s.omega[j] * r).cos()).sum::<f64>()
                    / s.num_features() as f64;
                assert!((mc - kind.correlation(r / 0.3)).abs() < 0.01, "{kind:?} r={r}: {mc}");
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = DMatrix::from_row_slice(3, 2, &[0.1, 0.2, 0.5, 0.9, 0.8, 0.4]);
        let ds = Dataset::unit(x, DVector::from_vec(vec![0.3, -1.0, 0.7])).unwrap();
        let theta = HyperParams::new(vec![0.4, 0.7], 1.3, 0.05, 0.2).unwrap();
        for kind in [KernelKind::Matern52, KernelKind::SquaredExponential] {
            let s = draw_pathwise_sample(&fit(&ds, &theta, kind).unwrap(), 256, 7).unwrap();
            let p = [0.35, 0.6];
            let mut g = [0.0; 2];
            let v = s.value_grad(&p, &mut g);
            assert!((v - s.value(&p)).abs() < 1e-12);
            for d in 0..2 {
                let h = 1e-6;
                let mut a = p;
                let mut b = p;
                a[d] += h;
                b[d] -= h;
                let fd = (s.value(&a) - s.value(&b)) / (2.0 * h);
                assert!((fd - g[d]).abs() < 1e-5, "{kind:?}: {fd} vs {}", g[d]);
            }
        }
    }

    #[test]
    fn noiseless_samples_interpolate() {
        let x = DMatrix::from_column_slice(4, 1, &[0.1, 0.4, 0.6, 0.9]);
        let y = vec![0.5, -0.3, 1.0, 0.2];
        let ds = Dataset::unit(x, DVector::from_vec(y.clone())).unwrap();
        let theta = HyperParams::new(vec![0.2], 1.0, 0.0, 0.0).unwrap();
        let post = fit(&ds, &theta, KernelKind::Matern52).unwrap();
        for seed in 0..5 {
            let s = draw_pathwise_sample(&post, 512, seed).unwrap();
            for (i, yi) in y.iter().enumerate() {
                assert!((s.value(&ds.point(i)) - yi).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rejects_zero_features() {
        let theta = HyperParams::unit(1);
        let post = fit(&Dataset::empty(1), &theta, KernelKind::Matern52).unwrap();
        assert!(draw_pathwise_sample(&post, 0, 0).is_err());
    }
}
