//! Pathwise samples reproduce the GP prior and posterior variances.

use nalgebra::{DMatrix, DVector};
use scorebo::gp::{fit, Dataset, HyperParams, KernelKind};
use scorebo::optimum::draw_pathwise_sample;
use scorebo::optimum::Surface;

fn empirical_moments(data: &Dataset, theta: &HyperParams, kind: KernelKind, x: &[f64], draws: u64) -> (f64, f64) {
    let post = fit(data, theta, kind).unwrap();
    let values: Vec<f64> = (0..draws)
        .map(|s| draw_pathwise_sample(&post, 1024, s).unwrap().value(x))
        .collect();
    let mean = values.iter().sum::<f64>() / draws as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
    (mean, var)
}

#[test]
fn prior_samples_match_prior_variance() {
    for kind in [KernelKind::Matern52, KernelKind::SquaredExponential] {
        let theta = HyperParams::new(vec![0.3, 0.5], 2.0, 1e-4, 0.5).unwrap();
        let (mean, var) = empirical_moments(&Dataset::empty(2), &theta, kind, &[0.4, 0.6], 2000);
        assert!((mean - 0.5).abs() < 0.15, "{kind:?}: mean {mean}");
        assert!((var / 2.0 - 1.0).abs() < 0.12, "{kind:?}: var {var}");
    }
}

#[test]
fn posterior_samples_match_posterior_moments() {
    let x = DMatrix::from_row_slice(4, 1, &[0.1, 0.35, 0.6, 0.9]);
    let y = DVector::from_vec(vec![0.5, -0.3, 0.8, 0.1]);
    let data = Dataset::unit(x, y).unwrap();
    let theta = HyperParams::new(vec![0.2], 1.0, 0.01, 0.0).unwrap();
    let post = fit(&data, &theta, KernelKind::Matern52).unwrap();
    for q in [0.2, 0.5, 0.75] {
        let exact = post.latent(&[q]);
        let (mean, var) = empirical_moments(&data, &theta, KernelKind::Matern52, &[q], 2000);
        assert!((mean - exact.mean).abs() < 4.0 * (exact.var / 2000.0).sqrt() + 0.01, "x={q}: mean {mean} vs {}", exact.mean);
        assert!((var / exact.var - 1.0).abs() < 0.15, "x={q}: var {var} vs {}", exact.var);
    }
}
