use statrs::function::erf::erfc;

use super::GaussianPredict;

/// Smallest variance returned by moment matching.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Standardized truncation points below this are treated as empty truncations.
const DEGENERATE_BETA: f64 = -8.0;

pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Moment-matched Gaussian of `g` restricted to `(-∞, upper]`.
///
/// For `β = (upper - μ)/σ` and `λ = φ(β)/Φ(β)` the truncated moments are
/// `μ - σλ` and `σ²(1 - βλ - λ²)`. When `β < -8` almost no mass survives and
/// a near-delta at `upper` is returned instead. Variances never drop below
/// [`VARIANCE_FLOOR`].
pub fn truncated_moments(g: GaussianPredict, upper: f64) -> GaussianPredict {
    if upper == f64::INFINITY {
        return g;
    }
    let out = |mean: f64, var: f64| GaussianPredict {
        mean,
        var: var.max(VARIANCE_FLOOR),
        includes_noise: g.includes_noise,
    };
    let sigma = g.var.max(0.0).sqrt();
    if sigma <= VARIANCE_FLOOR.sqrt() {
        return out(g.mean.min(upper), VARIANCE_FLOOR);
    }
    let beta = (upper - g.mean) / sigma;
    if beta < DEGENERATE_BETA {
        return out(upper, VARIANCE_FLOOR);
    }
    let lambda = std_normal_pdf(beta) / std_normal_cdf(beta);
    let mean = g.mean - sigma * lambda;
    let var = g.var * (1.0 - beta * lambda - lambda * lambda);
    out(mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_upper_is_identity() {
        let g = GaussianPredict::new(0.3, 2.0);
        assert_eq!(truncated_moments(g, f64::INFINITY), g);
    }

    #[test]
    fn half_normal_moments() {
        let t = truncated_moments(GaussianPredict::new(0.0, 1.0), 0.0);
        let pi = std::f64::consts::PI;
        assert!((t.mean + (2.0 / pi).sqrt()).abs() < 1e-12);
        assert!((t.var - (1.0 - 2.0 / pi)).abs() < 1e-12);
    }

    #[test]
    fn finite_truncation_shrinks_variance() {
        for &u in &[-3.0, -1.0, 0.0, 0.5, 2.0, 4.0] {
            let g = GaussianPredict::new(0.2, 1.7);
            let t = truncated_moments(g, u);
            assert!(t.var < g.var, "upper {u}");
            assert!(t.mean < g.mean);
        }
    }

    #[test]
    fn degenerate_truncation_collapses_to_upper() {
        let t = truncated_moments(GaussianPredict::new(0.0, 1.0), -9.0);
        assert_eq!(t.mean, -9.0);
        assert_eq!(t.var, VARIANCE_FLOOR);
    }

    #[test]
    fn zero_variance_input_is_handled() {
        let t = truncated_moments(GaussianPredict::new(1.0, 0.0), 1.0);
        assert_eq!((t.mean, t.var), (1.0, VARIANCE_FLOOR));
    }
}
