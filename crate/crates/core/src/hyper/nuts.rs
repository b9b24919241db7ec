//! Multinomial No-U-Turn sampler with dual-averaging step-size adaptation
//! and a windowed diagonal mass matrix.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Differentiable log density.
pub trait LogDensity {
    fn dim(&self) -> usize;
    /// Returns `log p(x)` and writes `∇ log p(x)` into `grad`. A non-finite
    /// value marks `x` as outside the support.
    fn log_density_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NutsSettings {
    pub max_depth: usize,
    pub target_accept: f64,
    /// Energy error beyond which a trajectory is declared divergent.
    pub max_energy_error: f64,
    pub adapt_mass_matrix: bool,
}

impl Default for NutsSettings {
    fn default() -> Self {
        Self { max_depth: 8, target_accept: 0.8, max_energy_error: 1000.0, adapt_mass_matrix: true }
    }
}

/// Output of one chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NutsOutput {
    pub draws: Vec<Vec<f64>>,
    /// Divergent transitions after warmup.
    pub divergences: usize,
    /// Number of post-warmup transitions.
    pub transitions: usize,
    pub mean_accept: f64,
    pub step_size: f64,
    pub inv_mass: Vec<f64>,
    pub mean_leapfrog_steps: f64,
}

impl NutsOutput {
    pub fn divergence_rate(&self) -> f64 {
        if self.transitions == 0 {
            0.0
        } else {
            self.divergences as f64 / self.transitions as f64
        }
    }
}

#[derive(Clone, Debug)]
struct Point {
    q: Vec<f64>,
    p: Vec<f64>,
    grad: Vec<f64>,
    logp: f64,
}

struct Subtree {
    left: Point,
    right: Point,
    proposal: Point,
    log_weight: f64,
    rho: Vec<f64>,
    turning: bool,
    diverged: bool,
    accept_sum: f64,
    steps: usize,
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

struct Integrator<'a, T: LogDensity> {
    target: &'a T,
    inv_mass: &'a [f64],
}

impl<T: LogDensity> Integrator<'_, T> {
    fn kinetic(&self, p: &[f64]) -> f64 {
        0.5 * p.iter().zip(self.inv_mass).map(|(p, m)| p * p * m).sum::<f64>()
    }

    fn hamiltonian(&self, pt: &Point) -> f64 {
        -pt.logp + self.kinetic(&pt.p)
    }

    fn evaluate(&self, q: Vec<f64>, p: Vec<f64>) -> Point {
        let mut grad = vec![0.0; q.len()];
        let logp = self.target.log_density_grad(&q, &mut grad);
        let logp = if logp.is_finite() && grad.iter().all(|g| g.is_finite()) { logp } else { f64::NEG_INFINITY };
        Point { q, p, grad, logp }
    }

    fn leapfrog(&self, pt: &Point, eps: f64) -> Point {
        let p_half: Vec<f64> = pt.p.iter().zip(&pt.grad).map(|(p, g)| p + 0.5 * eps * g).collect();
        let q: Vec<f64> =
            pt.q.iter().zip(&p_half).zip(self.inv_mass).map(|((q, p), m)| q + eps * m * p).collect();
        let mut next = self.evaluate(q, p_half);
        if next.logp.is_finite() {
            for (p, g) in next.p.iter_mut().zip(&next.grad) {
                *p += 0.5 * eps * g;
            }
        }
        next
    }

    /// No-U-turn criterion on a trajectory with summed momentum `rho` and
    /// end momenta `p_left`, `p_right`.
    fn is_turning(&self, rho: &[f64], p_left: &[f64], p_right: &[f64]) -> bool {
        let dot = |p: &[f64]| rho.iter().zip(p).zip(self.inv_mass).map(|((r, p), m)| r * p * m).sum::<f64>();
        dot(p_left) <= 0.0 || dot(p_right) <= 0.0
    }

    #[allow(clippy::too_many_arguments)]
    fn build_tree<R: Rng + ?Sized>(
        &self,
        edge: &Point,
        forward: bool,
        depth: usize,
        eps: f64,
        h0: f64,
        max_energy_error: f64,
        rng: &mut R,
    ) -> Subtree {
        if depth == 0 {
            let next = self.leapfrog(edge, if forward { eps } else { -eps });
            let h = if next.logp.is_finite() { self.hamiltonian(&next) } else { f64::INFINITY };
            let delta = h - h0;
            let diverged = !(delta.is_finite() && delta <= max_energy_error);
            let accept = if delta.is_nan() { 0.0 } else { (-delta).exp().min(1.0) };
            return Subtree {
                left: next.clone(),
                right: next.clone(),
                rho: next.p.clone(),
                proposal: next,
                log_weight: if diverged { f64::NEG_INFINITY } else { -delta },
                turning: false,
                diverged,
                accept_sum: accept,
                steps: 1,
            };
        }
        let first = self.build_tree(edge, forward, depth - 1, eps, h0, max_energy_error, rng);
        if first.turning || first.diverged {
            return first;
        }
        let outer = if forward { &first.right } else { &first.left };
        let second = self.build_tree(outer, forward, depth - 1, eps, h0, max_energy_error, rng);
        let log_weight = log_add_exp(first.log_weight, second.log_weight);
        let mut merged = Subtree {
            left: first.left,
            right: first.right,
            proposal: first.proposal,
            log_weight,
            rho: first.rho.iter().zip(&second.rho).map(|(a, b)| a + b).collect(),
            turning: second.turning,
            diverged: second.diverged,
            accept_sum: first.accept_sum + second.accept_sum,
            steps: first.steps + second.steps,
        };
        if second.turning || second.diverged {
            return merged;
        }
        // uniform multinomial choice inside a subtree
        let take_second = rng.random::<f64>().ln() < second.log_weight - log_weight;
        if take_second {
            merged.proposal = second.proposal;
        }
        if forward {
            merged.right = second.right;
        } else {
            merged.left = second.left;
        }
        merged.turning = self.is_turning(&merged.rho, &merged.left.p, &merged.right.p);
        merged
    }

    /// One NUTS transition from `current`; returns the new point, the mean
    /// acceptance statistic, whether it diverged and the leapfrog count.
    fn transition<R: Rng + ?Sized>(
        &self,
        current: &Point,
        eps: f64,
        settings: &NutsSettings,
        rng: &mut R,
    ) -> (Point, f64, bool, usize) {
        let p: Vec<f64> = self
            .inv_mass
            .iter()
            .map(|m| {
                let z: f64 = StandardNormal.sample(rng);
                z / m.sqrt()
            })
            .collect();
        let start = Point { p, ..current.clone() };
        let h0 = self.hamiltonian(&start);
        let mut left = start.clone();
        let mut right = start.clone();
        let mut rho = start.p.clone();
        let mut proposal = start;
        let mut log_weight = 0.0;
        let mut accept_sum = 0.0;
        let mut steps = 0;
        let mut diverged = false;
        for depth in 0..settings.max_depth {
            let forward = rng.random::<bool>();
            let edge = if forward { &right } else { &left };
            let sub = self.build_tree(edge, forward, depth, eps, h0, settings.max_energy_error, rng);
            accept_sum += sub.accept_sum;
            steps += sub.steps;
            if sub.diverged {
                diverged = true;
                break;
            }
            if sub.turning {
                break;
            }
            // biased progressive sampling favours the newer subtree
            if rng.random::<f64>().ln() < sub.log_weight - log_weight {
                proposal = sub.proposal;
            }
            log_weight = log_add_exp(log_weight, sub.log_weight);
            rho.iter_mut().zip(&sub.rho).for_each(|(a, b)| *a += b);
            if forward {
                right = sub.right;
            } else {
                left = sub.left;
            }
            if self.is_turning(&rho, &left.p, &right.p) {
                break;
            }
        }
        let mean_accept = if steps > 0 { accept_sum / steps as f64 } else { 0.0 };
        (proposal, mean_accept, diverged, steps)
    }
}

/// Hoffman–Gelman dual averaging of `log ε`.
struct DualAveraging {
    mu: f64,
    target: f64,
    h_bar: f64,
    log_eps: f64,
    log_eps_bar: f64,
    t: f64,
}

impl DualAveraging {
    const GAMMA: f64 = 0.05;
    const T0: f64 = 10.0;
    const KAPPA: f64 = 0.75;

    fn new(eps: f64, target: f64) -> Self {
        Self { mu: (10.0 * eps).ln(), target, h_bar: 0.0, log_eps: eps.ln(), log_eps_bar: 0.0, t: 0.0 }
    }

    fn update(&mut self, accept: f64) -> f64 {
        self.t += 1.0;
        let w = 1.0 / (self.t + Self::T0);
        self.h_bar = (1.0 - w) * self.h_bar + w * (self.target - accept);
        self.log_eps = self.mu - self.t.sqrt() / Self::GAMMA * self.h_bar;
        let eta = self.t.powf(-Self::KAPPA);
        self.log_eps_bar = eta * self.log_eps + (1.0 - eta) * self.log_eps_bar;
        self.log_eps.exp()
    }

    fn final_step(&self) -> f64 {
        self.log_eps_bar.exp()
    }
}

/// Ends of the slow mass-matrix windows inside warmup, Stan style: a fast
/// initial buffer, doubling slow windows, and a fast terminal buffer.
fn adaptation_windows(warmup: usize) -> Vec<usize> {
    if warmup < 20 {
        return Vec::new();
    }
    let init = (0.15 * warmup as f64) as usize;
    let term = (0.1 * warmup as f64) as usize;
    let end = warmup - term;
    let mut ends = Vec::new();
    let mut start = init;
    let mut size = 25.min(end - init).max(1);
    while start < end {
        let mut stop = start + size;
        // absorb a too-short remainder into the current window
        if stop + 2 * size > end {
            stop = end;
        }
        ends.push(stop);
        start = stop;
        size *= 2;
    }
    ends
}

fn find_initial_step<T: LogDensity, R: Rng + ?Sized>(integ: &Integrator<'_, T>, q: &Point, rng: &mut R) -> f64 {
    let mut eps: f64 = 0.1;
    let p: Vec<f64> = integ
        .inv_mass
        .iter()
        .map(|m| {
            let z: f64 = StandardNormal.sample(rng);
            z / m.sqrt()
        })
        .collect();
    let start = Point { p, ..q.clone() };
    let h0 = integ.hamiltonian(&start);
    let log_accept = |eps: f64| {
        let next = integ.leapfrog(&start, eps);
        if next.logp.is_finite() {
            h0 - integ.hamiltonian(&next)
        } else {
            f64::NEG_INFINITY
        }
    };
    let up = log_accept(eps) > 0.5f64.ln();
    for _ in 0..60 {
        let la = log_accept(eps);
        if up != (la > 0.5f64.ln()) {
            break;
        }
        eps = if up { eps * 2.0 } else { eps / 2.0 };
    }
    eps.clamp(1e-8, 1e3)
}

/// Runs one chain: `warmup` adaptation transitions, then `draws · thinning`
/// transitions keeping every `thinning`-th state.
pub fn sample_nuts<T: LogDensity, R: Rng + ?Sized>(
    target: &T,
    init: &[f64],
    warmup: usize,
    draws: usize,
    thinning: usize,
    settings: &NutsSettings,
    rng: &mut R,
) -> NutsOutput {
    let dim = target.dim();
    let mut inv_mass = vec![1.0; dim];
    let mut current = Integrator { target, inv_mass: &inv_mass }.evaluate(init.to_vec(), vec![0.0; dim]);
    let mut eps = find_initial_step(&Integrator { target, inv_mass: &inv_mass }, &current, rng);
    let mut averaging = DualAveraging::new(eps, settings.target_accept);
    let windows = if settings.adapt_mass_matrix { adaptation_windows(warmup) } else { Vec::new() };
    let window_start = |i: usize| if i == 0 { (0.15 * warmup as f64) as usize } else { windows[i - 1] };
    let mut next_window = 0;
    let mut window_draws: Vec<Vec<f64>> = Vec::new();

    for it in 0..warmup {
        let integ = Integrator { target, inv_mass: &inv_mass };
        let (next, accept, _, _) = integ.transition(&current, eps, settings, rng);
        current = next;
        eps = averaging.update(accept);
        if next_window < windows.len() {
            if it >= window_start(next_window) {
                window_draws.push(current.q.clone());
            }
            if it + 1 == windows[next_window] {
                let n = window_draws.len() as f64;
                if n >= 3.0 {
                    for d in 0..dim {
                        let mean = window_draws.iter().map(|x| x[d]).sum::<f64>() / n;
                        let var = window_draws.iter().map(|x| (x[d] - mean).powi(2)).sum::<f64>() / (n - 1.0);
                        inv_mass[d] = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0));
                    }
                    let integ = Integrator { target, inv_mass: &inv_mass };
                    eps = find_initial_step(&integ, &current, rng);
                    averaging = DualAveraging::new(eps, settings.target_accept);
                }
                window_draws.clear();
                next_window += 1;
            }
        }
    }
    if warmup > 0 {
        eps = averaging.final_step();
    }

    let integ = Integrator { target, inv_mass: &inv_mass };
    let thinning = thinning.max(1);
    let mut out = Vec::with_capacity(draws);
    let (mut divergences, mut accept_total, mut steps_total) = (0usize, 0.0, 0usize);
    for it in 0..draws * thinning {
        let (next, accept, diverged, steps) = integ.transition(&current, eps, settings, rng);
        current = next;
        divergences += usize::from(diverged);
        accept_total += accept;
        steps_total += steps;
        if (it + 1) % thinning == 0 {
            out.push(current.q.clone());
        }
    }
    let transitions = draws * thinning;
    NutsOutput {
        draws: out,
        divergences,
        transitions,
        mean_accept: if transitions > 0 { accept_total / transitions as f64 } else { 0.0 },
        step_size: eps,
        inv_mass,
        mean_leapfrog_steps: if transitions > 0 { steps_total as f64 / transitions as f64 } else { 0.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    struct Gaussian {
        mean: Vec<f64>,
        var: Vec<f64>,
    }

    impl LogDensity for Gaussian {
        fn dim(&self) -> usize {
            self.mean.len()
        }
        fn log_density_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
            let mut lp = 0.0;
            for i in 0..x.len() {
                let d = x[i] - self.mean[i];
                lp -= 0.5 * d * d / self.var[i];
                grad[i] = -d / self.var[i];
            }
            lp
        }
    }

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn standard_normal_moments() {
        let target = Gaussian { mean: vec![0.0], var: vec![1.0] };
        let mut rng = rng_from_seed(11);
        let out = sample_nuts(&target, &[0.5], 500, 10_000, 1, &NutsSettings::default(), &mut rng);
        let xs: Vec<f64> = out.draws.iter().map(|x| x[0]).collect();
        let (m, v) = moments(&xs);
        assert!(m.abs() < 0.05, "mean {m}");
        assert!((v - 1.0).abs() < 0.1, "var {v}");
        assert_eq!(out.divergences, 0);
    }

    #[test]
    fn adapts_to_badly_scaled_gaussian() {
        let target = Gaussian { mean: vec![1.0, -2.0], var: vec![100.0, 0.01] };
        let mut rng = rng_from_seed(5);
        let out = sample_nuts(&target, &[0.0, 0.0], 500, 4000, 1, &NutsSettings::default(), &mut rng);
        for d in 0..2 {
            let xs: Vec<f64> = out.draws.iter().map(|x| x[d]).collect();
            let (m, v) = moments(&xs);
            let sd = target.var[d].sqrt();
            assert!((m - target.mean[d]).abs() < 0.15 * sd, "dim {d} mean {m}");
            assert!((v / target.var[d] - 1.0).abs() < 0.2, "dim {d} var {v}");
        }
        assert!(out.inv_mass[0] > 10.0 && out.inv_mass[1] < 0.1);
    }

    #[test]
    fn deterministic_given_seed() {
        let target = Gaussian { mean: vec![0.0, 1.0], var: vec![1.0, 2.0] };
        let run = || {
            sample_nuts(&target, &[0.0, 0.0], 50, 20, 2, &NutsSettings::default(), &mut rng_from_seed(3))
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn windows_fit_inside_warmup() {
        let w = adaptation_windows(256);
        assert!(!w.is_empty());
        assert!(*w.last().unwrap() <= 256 - 25);
        assert!(w.windows(2).all(|p| p[0] < p[1]));
        assert!(adaptation_windows(10).is_empty());
    }
}
