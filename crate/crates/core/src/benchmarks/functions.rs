//! Standard synthetic test functions in their usual (mostly minimization)
//! form, evaluated in original coordinates.

use std::f64::consts::PI;

/// Gramacy & Lee (2012), on `[0.5, 2.5]`.
pub fn gramacy1d(x: &[f64]) -> f64 {
    let x = x[0];
    (10.0 * PI * x).sin() / (2.0 * x) + (x - 1.0).powi(4)
}

/// Piecewise Higdon / Gramacy & Lee function, on `[0, 20]`.
pub fn higdon(x: &[f64]) -> f64 {
    let x = x[0];
    if x < 10.0 {
        (PI * x / 5.0).sin() + 0.2 * (4.0 * PI * x / 5.0).cos()
    } else {
        x / 10.0 - 1.0
    }
}

/// Gramacy & Lee (2008), `x₁ exp(−x₁² − x₂²)` on `[−2, 6]²`.
pub fn gramacy2d(x: &[f64]) -> f64 {
    x[0] * (-x[0] * x[0] - x[1] * x[1]).exp()
}

/// Branin–Hoo on `[−5, 10] × [0, 15]`; global minimum 0.397887.
pub fn branin(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    (x2 - b * x1 * x1 + c * x1 - 6.0).powi(2) + 10.0 * (1.0 - t) * x1.cos() + 10.0
}

/// Ishigami with `a = 7`, `b = 0.1` on `[−π, π]³`.
pub fn ishigami(x: &[f64]) -> f64 {
    x[0].sin() + 7.0 * x[1].sin().powi(2) + 0.1 * x[2].powi(4) * x[0].sin()
}

const HARTMANN_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];

const HARTMANN3_A: [[f64; 3]; 4] = [[3.0, 10.0, 30.0], [0.1, 10.0, 35.0], [3.0, 10.0, 30.0], [0.1, 10.0, 35.0]];

const HARTMANN3_P: [[f64; 3]; 4] = [
    [0.3689, 0.1170, 0.2673],
    [0.4699, 0.4387, 0.7470],
    [0.1091, 0.8732, 0.5547],
    [0.0381, 0.5743, 0.8828],
];

const HARTMANN6_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];

const HARTMANN6_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];

fn hartmann_sum<const D: usize>(x: &[f64], a: &[[f64; D]; 4], p: &[[f64; D]; 4], dims: usize) -> f64 {
    (0..4)
        .map(|i| {
            let inner: f64 = (0..dims).map(|j| a[i][j] * (x[j] - p[i][j]).powi(2)).sum();
            HARTMANN_ALPHA[i] * (-inner).exp()
        })
        .sum()
}

/// Hartmann-3 on `[0,1]³`; global minimum −3.86278.
pub fn hartmann3(x: &[f64]) -> f64 {
    -hartmann_sum(x, &HARTMANN3_A, &HARTMANN3_P, 3)
}

/// Four-dimensional Hartmann on `[0,1]⁴`, built from the first four columns
/// of the six-dimensional constants and rescaled.
pub fn hartmann4(x: &[f64]) -> f64 {
    (1.1 - hartmann_sum(x, &HARTMANN6_A, &HARTMANN6_P, 4)) / 0.839
}

/// Minimum of [`hartmann4`], located numerically.
pub const HARTMANN4_MIN: f64 = -3.134494141222399;
pub const HARTMANN4_ARGMIN: [f64; 4] = [0.1873952700719535, 0.1941515251530932, 0.5579177770064316, 0.26477962051615656];

/// Hartmann-6 on `[0,1]⁶`; global minimum −3.32237.
pub fn hartmann6(x: &[f64]) -> f64 {
    -hartmann_sum(x, &HARTMANN6_A, &HARTMANN6_P, 6)
}

/// Rosenbrock in any dimension ≥ 2; global minimum 0 at `(1, …, 1)`.
pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2)).sum()
}

/// Ackley with `a = 20`, `b = 0.2`, `c = 2π`; global minimum 0 at the origin.
pub fn ackley(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / n;
    let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
    -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + std::f64::consts::E
}
