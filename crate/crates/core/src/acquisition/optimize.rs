use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmc::sobol_points;

/// Candidate-plus-pattern-search settings for maximizing an acquisition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcqOptSettings {
    /// Scrambled-Sobol candidates scored first.
    pub candidates: usize,
    /// Best candidates refined by pattern search.
    pub refine: usize,
    /// Initial pattern-search step in unit-cube coordinates.
    pub initial_step: f64,
    /// Pattern search stops once the step falls below this.
    pub min_step: f64,
    /// Evaluation budget per refined candidate.
    pub max_evals: usize,
}

impl Default for AcqOptSettings {
    fn default() -> Self {
        Self { candidates: 512, refine: 4, initial_step: 0.1, min_step: 1e-4, max_evals: 200 }
    }
}

impl AcqOptSettings {
    /// High-resolution settings for cheap objectives such as the posterior
    /// mean.
    pub fn fine() -> Self {
        Self { min_step: 1e-8, max_evals: 2000, ..Self::default() }
    }
}

/// Coordinate-wise compass search started at `x`; each sweep tries `±step`
/// along every axis and halves the step after a sweep without improvement.
fn pattern_search<F: Fn(&[f64]) -> f64>(f: &F, mut x: Vec<f64>, mut fx: f64, s: &AcqOptSettings) -> (Vec<f64>, f64) {
    let mut step = s.initial_step;
    let mut evals = 0;
    while step >= s.min_step && evals < s.max_evals {
        let mut improved = false;
        for d in 0..x.len() {
            for dir in [1.0, -1.0] {
                let v = (x[d] + dir * step).clamp(0.0, 1.0);
                if v == x[d] {
                    continue;
                }
                let mut trial = x.clone();
                trial[d] = v;
                let ft = f(&trial);
                evals += 1;
                if ft > fx {
                    x = trial;
                    fx = ft;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// Maximizes `f` over `[0,1]^dim`: scores `settings.candidates` Sobol
/// points and refines the best `settings.refine` by pattern search. The
/// returned value is at least the best candidate value. Non-finite values
/// are treated as `-∞`.
pub fn optimize_acquisition<F: Fn(&[f64]) -> f64>(
    f: F,
    dim: usize,
    settings: &AcqOptSettings,
    seed: u64,
) -> Result<(Vec<f64>, f64)> {
    if settings.candidates == 0 || settings.refine == 0 {
        return Err(Error::InvalidArgument("acquisition optimization needs at least one candidate".into()));
    }
    let safe = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let pts = sobol_points(settings.candidates, dim, seed);
    let mut scored: Vec<(f64, Vec<f64>)> = (0..settings.candidates)
        .map(|i| {
            let x: Vec<f64> = pts.row(i).iter().copied().collect();
            (safe(&x), x)
        })
        .collect();
    // stable sort keeps the Sobol order among ties, so results are reproducible
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored.truncate(settings.refine);
    let mut best = (scored[0].1.clone(), scored[0].0);
    for (fx, x) in scored {
        let (x, fx) = pattern_search(&safe, x, fx, settings);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    Ok(best)
}
