//! Statistical distances between Gaussians and Gaussian mixtures.
//!
//! Closed forms cover Gaussian pairs. A mixture is either collapsed to a
//! single Gaussian by [`moment_match`] or compared to a Gaussian through the
//! quasi-Monte Carlo estimators [`mc_hellinger`] and [`mc_wasserstein2`].
//! KL is only available in closed form.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::gp::GaussianPredict;
use crate::qmc::{sobol_points, MAX_POINTS};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const QUANTILE_TOL: f64 = 1e-10;
const QUANTILE_MAX_ITERS: usize = 200;
/// Largest sample count accepted by the sampling estimators.
pub const MAX_SAMPLES: usize = MAX_POINTS;

/// Equal-weight Gaussian mixture.
#[derive(Clone, Debug, PartialEq)]
pub struct MixturePredict {
    components: Vec<GaussianPredict>,
}

impl MixturePredict {
    pub fn new(components: Vec<GaussianPredict>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("mixture needs at least one component".into()));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[GaussianPredict] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.components.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(|g| g.mean).sum::<f64>() * self.weight()
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        let logs: Vec<f64> = self.components.iter().map(|g| g.log_density(x)).collect();
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + (logs.iter().map(|l| (l - max).exp()).sum::<f64>() * self.weight()).ln()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.components.iter().map(|g| gaussian_cdf(g, x)).sum::<f64>() * self.weight()
    }

    /// Inverse CDF by bisection on `[min μ - 10 max σ, max μ + 10 max σ]`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        let (lo, hi) = self.bracket();
        self.quantile_in(u, lo, hi)
    }

    fn bracket(&self) -> (f64, f64) {
        let max_sd = self.components.iter().map(|g| g.std()).fold(0.0, f64::max);
        let min_mu = self.components.iter().map(|g| g.mean).fold(f64::INFINITY, f64::min);
        let max_mu = self.components.iter().map(|g| g.mean).fold(f64::NEG_INFINITY, f64::max);
        (min_mu - 10.0 * max_sd, max_mu + 10.0 * max_sd)
    }

    fn quantile_in(&self, u: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::InvalidArgument(format!("quantile level {u} outside (0,1)")));
        }
        for _ in 0..QUANTILE_MAX_ITERS {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= QUANTILE_TOL {
                return Ok(mid);
            }
            if self.cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::BisectionFailed(u))
    }
}

fn gaussian_cdf(g: &GaussianPredict, x: f64) -> f64 {
    if g.var <= 0.0 {
        return if x < g.mean { 0.0 } else { 1.0 };
    }
    crate::gp::std_normal_cdf((x - g.mean) / g.std())
}

fn gaussian_log_pdf(g: &GaussianPredict, x: f64) -> f64 {
    let r = (x - g.mean) / g.std();
    -0.5 * r * r - g.std().ln() - LN_SQRT_2PI
}

/// Which statistical distance to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Hellinger,
    Wasserstein2,
    Kl,
}

/// How a mixture-to-Gaussian distance is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Collapse the mixture to its moment-matched Gaussian and use the closed form.
    #[default]
    MomentMatch,
    /// Sampling estimate with the given number of draws (or quadrature nodes).
    MonteCarlo { samples: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceSpec {
    pub metric: Metric,
    #[serde(default)]
    pub estimator: Estimator,
}

impl DistanceSpec {
    pub fn moment_matched(metric: Metric) -> Self {
        Self { metric, estimator: Estimator::MomentMatch }
    }

    pub fn monte_carlo(metric: Metric, samples: usize) -> Self {
        Self { metric, estimator: Estimator::MonteCarlo { samples } }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.estimator, self.metric) {
            (Estimator::MonteCarlo { .. }, Metric::Kl) => Err(Error::InvalidArgument(
                "KL has no sampling estimator; use the moment-matched estimator".into(),
            )),
            (Estimator::MonteCarlo { samples }, _) if !(2..=MAX_SAMPLES).contains(&samples) => {
                Err(Error::InvalidArgument(format!(
                    "Monte Carlo distance needs between 2 and {MAX_SAMPLES} samples, got {samples}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Closed-form distance between two Gaussians. For KL the order is
    /// `KL(a ‖ b)`.
    pub fn gaussian(&self, a: &GaussianPredict, b: &GaussianPredict) -> f64 {
        match self.metric {
            Metric::Hellinger => gaussian_hellinger(a, b),
            Metric::Wasserstein2 => gaussian_wasserstein2(a, b),
            Metric::Kl => gaussian_kl(a, b),
        }
    }
}

/// Hellinger distance `H` (not `H²`) between two Gaussians.
pub fn gaussian_hellinger(a: &GaussianPredict, b: &GaussianPredict) -> f64 {
    let (va, vb) = (a.var.max(0.0), b.var.max(0.0));
    // the square root would turn rounding error in H² into ~1e-8
    if va == vb && a.mean == b.mean {
        return 0.0;
    }
    if va == 0.0 || vb == 0.0 {
        return if va == vb && a.mean == b.mean { 0.0 } else { 1.0 };
    }
    let (sa, sb) = (va.sqrt(), vb.sqrt());
    let sum = va + vb;
    let d = a.mean - b.mean;
    let h2 = 1.0 - (2.0 * sa * sb / sum).sqrt() * (-0.25 * d * d / sum).exp();
    h2.clamp(0.0, 1.0).sqrt()
}

pub fn gaussian_wasserstein2(a: &GaussianPredict, b: &GaussianPredict) -> f64 {
    let dm = a.mean - b.mean;
    let ds = a.var.max(0.0).sqrt() - b.var.max(0.0).sqrt();
    (dm * dm + ds * ds).sqrt()
}

/// `KL(a ‖ b)`; `+∞` when `b` has zero variance.
pub fn gaussian_kl(a: &GaussianPredict, b: &GaussianPredict) -> f64 {
    if b.var <= 0.0 || a.var <= 0.0 {
        return if a == b { 0.0 } else { f64::INFINITY };
    }
    let d = a.mean - b.mean;
    let kl = 0.5 * (b.var / a.var).ln() + (a.var + d * d) / (2.0 * b.var) - 0.5;
    kl.max(0.0)
}

/// Gaussian sharing the mixture's mean and variance.
pub fn moment_match(mix: &MixturePredict) -> GaussianPredict {
    let w = mix.weight();
    let mean = mix.mean();
    let within = mix.components.iter().map(|g| g.var).sum::<f64>() * w;
    let between = mix.components.iter().map(|g| (g.mean - mean).powi(2)).sum::<f64>() * w;
    GaussianPredict {
        mean,
        var: within + between,
        includes_noise: mix.components.iter().all(|g| g.includes_noise),
    }
}

/// Sampling estimate along with how many draws were discarded because the
/// mixture density underflowed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub skipped: usize,
}

/// Draws from a mixture with their log densities, reusable across many
/// Gaussians compared against the same mixture.
#[derive(Clone, Debug)]
pub struct MixtureDraws {
    points: Vec<f64>,
    log_p: Vec<f64>,
}

impl MixtureDraws {
    /// `samples` randomized quasi-Monte Carlo draws: each scrambled Sobol
    /// point picks a component uniformly with its first coordinate and maps
    /// its second through that component's inverse CDF.
    pub fn new(mix: &MixturePredict, samples: usize, seed: u64) -> Self {
        let m = mix.len();
        let u = sobol_points(samples, 2, seed);
        let std_normal = Normal::standard();
        let points: Vec<f64> = (0..samples)
            .map(|i| {
                let g = &mix.components[((u[(i, 0)] * m as f64) as usize).min(m - 1)];
                let z = std_normal.inverse_cdf(u[(i, 1)].clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON));
                g.mean + g.std() * z
            })
            .collect();
        let log_p = points.iter().map(|&x| mix.log_pdf(x)).collect();
        Self { points, log_p }
    }

    /// `H(p, q)` from `H² ≈ 1 - mean(sqrt(q(x)/p(x)))`, clamped to `[0, 1]`.
    pub fn hellinger(&self, q: &GaussianPredict) -> McEstimate {
        if q.var <= 0.0 {
            return McEstimate { value: 1.0, skipped: 0 };
        }
        let mut acc = 0.0;
        let mut used = 0usize;
        for (&x, &lp) in self.points.iter().zip(&self.log_p) {
            if !lp.is_finite() {
                continue;
            }
            acc += (0.5 * (gaussian_log_pdf(q, x) - lp)).exp();
            used += 1;
        }
        let skipped = self.points.len() - used;
        if used == 0 {
            return McEstimate { value: 1.0, skipped };
        }
        let h2 = 1.0 - acc / used as f64;
        McEstimate { value: h2.clamp(0.0, 1.0).sqrt(), skipped }
    }
}

/// Monte Carlo Hellinger distance between a mixture `p` and a Gaussian `q`,
/// sampling from `p`. Deterministic given `seed`.
pub fn mc_hellinger(p: &MixturePredict, q: &GaussianPredict, samples: usize, seed: u64) -> Result<McEstimate> {
    if !(2..=MAX_SAMPLES).contains(&samples) {
        return Err(Error::InvalidArgument(format!("need between 2 and {MAX_SAMPLES} samples, got {samples}")));
    }
    Ok(MixtureDraws::new(p, samples, seed).hellinger(q))
}

/// Mixture quantiles at the midpoint nodes `(ℓ - ½)/L`, ℓ = 1..L.
#[derive(Clone, Debug)]
pub struct QuantileGrid {
    levels: Vec<f64>,
    quantiles: Vec<f64>,
}

impl QuantileGrid {
    pub fn new(mix: &MixturePredict, nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 nodes, got {nodes}")));
        }
        let levels: Vec<f64> = (0..nodes).map(|l| (l as f64 + 0.5) / nodes as f64).collect();
        let (mut lo, hi) = mix.bracket();
        let mut quantiles = Vec::with_capacity(nodes);
        for &u in &levels {
            let q = mix.quantile_in(u, lo, hi)?;
            quantiles.push(q);
            // levels increase, so each quantile bounds the next from below
            lo = q - QUANTILE_TOL;
        }
        Ok(Self { levels, quantiles })
    }

    pub fn quantiles(&self) -> &[f64] {
        &self.quantiles
    }

    /// `W₂(p, q)` from the mean squared quantile gap over the nodes.
    pub fn wasserstein2(&self, q: &GaussianPredict) -> f64 {
        let sd = q.var.max(0.0).sqrt();
        let std_normal = Normal::standard();
        let sum: f64 = self
            .levels
            .iter()
            .zip(&self.quantiles)
            .map(|(&u, &p)| {
                let qu = q.mean + sd * std_normal.inverse_cdf(u);
                (qu - p).powi(2)
            })
            .sum();
        (sum / self.levels.len() as f64).sqrt()
    }
}

/// Quasi-Monte Carlo Wasserstein-2 distance between a mixture and a Gaussian.
pub fn mc_wasserstein2(p: &MixturePredict, q: &GaussianPredict, nodes: usize) -> Result<f64> {
    Ok(QuantileGrid::new(p, nodes)?.wasserstein2(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(m: f64, v: f64) -> GaussianPredict {
        GaussianPredict::new(m, v)
    }

    #[test]
    fn identical_gaussians_are_at_distance_zero() {
        let a = g(0.3, 1.7);
        assert!(gaussian_hellinger(&a, &a) < 1e-12);
        assert_eq!(gaussian_wasserstein2(&a, &a), 0.0);
        assert!(gaussian_kl(&a, &a) < 1e-12);
    }

    #[test]
    fn closed_form_reference_values() {
        let h = gaussian_hellinger(&g(0.0, 1.0), &g(1.0, 1.0));
        assert!((h - (1.0 - (-0.125f64).exp()).sqrt()).abs() < 1e-12);
        // quadrature of ½∫(√p - √q)² with scipy
        assert!((h - 0.342_787_248_034_994).abs() < 1e-12);
        assert!((gaussian_wasserstein2(&g(0.0, 1.0), &g(1.0, 1.0)) - 1.0).abs() < 1e-15);
        assert!((gaussian_wasserstein2(&g(0.0, 1.0), &g(0.0, 4.0)) - 1.0).abs() < 1e-15);
        assert!((gaussian_kl(&g(0.0, 1.0), &g(1.0, 1.0)) - 0.5).abs() < 1e-15);
        let expected = 2f64.ln() + 0.125 - 0.5;
        assert!((gaussian_kl(&g(0.0, 1.0), &g(0.0, 4.0)) - expected).abs() < 1e-15);
    }

    #[test]
    fn kl_is_asymmetric() {
        let a = g(0.0, 1.0);
        let b = g(0.0, 4.0);
        assert!((gaussian_kl(&a, &b) - gaussian_kl(&b, &a)).abs() > 0.1);
    }

    #[test]
    fn degenerate_variances() {
        let d = g(1.0, 0.0);
        assert_eq!(gaussian_hellinger(&d, &d), 0.0);
        assert_eq!(gaussian_hellinger(&d, &g(2.0, 0.0)), 1.0);
        assert_eq!(gaussian_hellinger(&d, &g(1.0, 1.0)), 1.0);
        assert_eq!(gaussian_kl(&g(0.0, 1.0), &d), f64::INFINITY);
    }

    #[test]
    fn moment_matching() {
        let a = g(0.3, 0.5);
        assert_eq!(moment_match(&MixturePredict::new(vec![a]).unwrap()), a);
        let mm = moment_match(&MixturePredict::new(vec![g(0.0, 1.0), g(2.0, 1.0)]).unwrap());
        assert_eq!((mm.mean, mm.var), (1.0, 2.0));
        let mm = moment_match(&MixturePredict::new(vec![a; 5]).unwrap());
        assert!((mm.mean - a.mean).abs() < 1e-15 && (mm.var - a.var).abs() < 1e-15);
    }

    #[test]
    fn empty_mixture_is_rejected() {
        assert!(MixturePredict::new(vec![]).is_err());
    }

    #[test]
    fn mc_hellinger_identical_and_shifted() {
        let q = g(1.0, 1.0);
        let p_same = MixturePredict::new(vec![q]).unwrap();
        assert!(mc_hellinger(&p_same, &q, 64, 3).unwrap().value < 1e-6);
        let p = MixturePredict::new(vec![g(0.0, 1.0)]).unwrap();
        let est = mc_hellinger(&p, &q, 4096, 3).unwrap();
        assert!((est.value - 0.342_787).abs() < 0.02, "{}", est.value);
        assert_eq!(est.skipped, 0);
        assert_eq!(est, mc_hellinger(&p, &q, 4096, 3).unwrap());
        assert!(mc_hellinger(&p, &q, 1, 3).is_err());
    }

    #[test]
    fn mc_wasserstein_identical_and_shifted() {
        let q = g(1.0, 1.0);
        let p_same = MixturePredict::new(vec![q]).unwrap();
        assert!(mc_wasserstein2(&p_same, &q, 256).unwrap() < 1e-6);
        let p = MixturePredict::new(vec![g(0.0, 1.0)]).unwrap();
        assert!((mc_wasserstein2(&p, &q, 1024).unwrap() - 1.0).abs() < 0.02);
    }

    #[test]
    fn symmetric_mixture_median_is_zero() {
        for &a in &[0.5, 2.0, 5.0] {
            let p = MixturePredict::new(vec![g(-a, 1.0), g(a, 1.0)]).unwrap();
            assert!(p.quantile(0.5).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let p = MixturePredict::new(vec![g(-1.0, 0.3), g(0.5, 2.0), g(3.0, 0.7)]).unwrap();
        let grid = QuantileGrid::new(&p, 512).unwrap();
        for (i, &x) in grid.quantiles().iter().enumerate() {
            let u = (i as f64 + 0.5) / 512.0;
            assert!((p.cdf(x) - u).abs() < 1e-10);
        }
    }

    #[test]
    fn kl_has_no_sampling_estimator() {
        assert!(DistanceSpec::monte_carlo(Metric::Kl, 256).validate().is_err());
        assert!(DistanceSpec::moment_matched(Metric::Kl).validate().is_ok());
        assert!(DistanceSpec::monte_carlo(Metric::Hellinger, MAX_SAMPLES + 1).validate().is_err());
    }

    #[test]
    fn mc_hellinger_is_self_consistent_on_mixtures() {
        let p = MixturePredict::new(vec![g(-1.0, 0.3), g(0.5, 2.0), g(3.0, 0.7), g(0.0, 0.1)]).unwrap();
        for q in [g(0.0, 1.0), g(2.0, 0.5), g(-1.0, 3.0)] {
            let coarse = mc_hellinger(&p, &q, 1 << 14, 4).unwrap().value;
            let fine = mc_hellinger(&p, &q, 1 << 16, 5).unwrap().value;
            assert!((coarse - fine).abs() < 0.01, "{coarse} vs {fine}");
        }
    }

    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        idx.iter().enumerate().for_each(|(rank, &i)| r[i] = rank as f64);
        r
    }

    fn correlation(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn moment_matching_preserves_the_ranking_of_sampled_hellinger() {
        use rand::Rng;
        let mut rng = crate::rng::rng_from_seed(11);
        for case in 0..5 {
            // four components whose moments vary smoothly over a 1D query axis
            let waves: Vec<[f64; 4]> = (0..4).map(|_| std::array::from_fn(|_| rng.random_range(0.5..6.0))).collect();
            let (mut mm, mut mc) = (Vec::new(), Vec::new());
            for i in 0..200 {
                let x = i as f64 / 199.0;
                let comps: Vec<_> = waves
                    .iter()
                    .map(|w| g(w[0] * (w[1] * x).sin(), 0.05 + w[2] * (0.5 + 0.5 * (w[3] * x).cos())))
                    .collect();
                let mix = MixturePredict::new(comps.clone()).unwrap();
                mm.push(gaussian_hellinger(&moment_match(&mix), &comps[0]));
                mc.push(mc_hellinger(&mix, &comps[0], 4096, i as u64).unwrap().value);
            }
            let rho = correlation(&ranks(&mm), &ranks(&mc));
            assert!(rho > 0.9, "case {case}: Spearman {rho}");
        }
    }
}
