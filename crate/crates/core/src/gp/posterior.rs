use nalgebra::{DMatrix, DVector};

use super::kernel::{kernel_value, row};
use super::{Dataset, GaussianPredict, HyperParams, KernelKind};
use crate::error::{Error, Result};

/// Diagonal jitter tried in order when factorizing `K + σ_ε² I`.
pub const JITTER_LADDER: [f64; 4] = [0.0, 1e-8, 1e-6, 1e-4];

/// Below this fraction of `σ_f²` a rank-1 extension is treated as broken down.
const RANK_ONE_BREAKDOWN: f64 = 1e-12;

/// A fitted exact GP. Immutable; conditioning returns a new value.
#[derive(Clone, Debug)]
pub struct GpPosterior {
    dataset: Dataset,
    theta: HyperParams,
    kind: KernelKind,
    /// Observed inputs followed by any fantasy points, one per row.
    train_x: Vec<Vec<f64>>,
    train_y: DVector<f64>,
    /// Per-point noise variance; zero for fantasy points.
    point_noise: DVector<f64>,
    chol: DMatrix<f64>,
    alpha: DVector<f64>,
    jitter: f64,
    refit_fallback: bool,
}

/// Fits an exact GP to `dataset` under fixed hyperparameters.
pub fn fit(dataset: &Dataset, theta: &HyperParams, kind: KernelKind) -> Result<GpPosterior> {
    theta.validate()?;
    if dataset.dim() != theta.dim() {
        return Err(Error::DimensionMismatch { expected: theta.dim(), found: dataset.dim() });
    }
    let train_x: Vec<Vec<f64>> = (0..dataset.len()).map(|i| dataset.point(i)).collect();
    let point_noise = DVector::from_element(dataset.len(), theta.noise_var);
    GpPosterior::from_parts(
        dataset.clone(),
        theta.clone(),
        kind,
        train_x,
        dataset.targets().clone(),
        point_noise,
        false,
    )
}

fn factorize(mut k: DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let n = k.nrows();
    let mut applied = 0.0;
    for &jitter in &JITTER_LADDER {
        for i in 0..n {
            k[(i, i)] += jitter - applied;
        }
        applied = jitter;
        if let Some(c) = k.clone().cholesky() {
            return Ok((c.unpack(), jitter));
        }
    }
    Err(Error::CholeskyFailed { max_jitter: applied })
}

/// Solves `L z = b` for lower-triangular `L`.
pub(crate) fn forward_solve(l: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut z = b.to_vec();
    for j in 0..n {
        z[j] /= l[(j, j)];
        let zj = z[j];
        let col = l.column(j);
        for i in (j + 1)..n {
            z[i] -= col[i] * zj;
        }
    }
    z
}

/// Solves `Lᵀ z = b` for lower-triangular `L`.
pub(crate) fn backward_solve(l: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut z = b.to_vec();
    for i in (0..n).rev() {
        let col = l.column(i);
        let mut s = z[i];
        for j in (i + 1)..n {
            s -= col[j] * z[j];
        }
        z[i] = s / l[(i, i)];
    }
    z
}

impl GpPosterior {
    fn from_parts(
        dataset: Dataset,
        theta: HyperParams,
        kind: KernelKind,
        train_x: Vec<Vec<f64>>,
        train_y: DVector<f64>,
        point_noise: DVector<f64>,
        refit_fallback: bool,
    ) -> Result<Self> {
        let n = train_x.len();
        let mut k = DMatrix::from_fn(n, n, |i, j| kernel_value(&train_x[i], &train_x[j], &theta, kind));
        for i in 0..n {
            k[(i, i)] += point_noise[i];
        }
        let (chol, jitter) = factorize(k)?;
        let resid: Vec<f64> = train_y.iter().map(|y| y - theta.mean_const).collect();
        let alpha = DVector::from_vec(backward_solve(&chol, &forward_solve(&chol, &resid)));
        Ok(Self { dataset, theta, kind, train_x, train_y, point_noise, chol, alpha, jitter, refit_fallback })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn theta(&self) -> &HyperParams {
        &self.theta
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    /// Lower Cholesky factor of the training covariance (with noise and jitter).
    pub fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// `(K + diag(noise))⁻¹ (y - c)`.
    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    /// Diagonal jitter that was needed for the factorization.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// True when a rank-1 fantasy update broke down and a full refit was used.
    pub fn refit_fallback(&self) -> bool {
        self.refit_fallback
    }

    pub fn num_train(&self) -> usize {
        self.train_x.len()
    }

    pub fn num_fantasies(&self) -> usize {
        self.train_x.len() - self.dataset.len()
    }

    pub fn train_inputs(&self) -> &[Vec<f64>] {
        &self.train_x
    }

    pub fn train_targets(&self) -> &DVector<f64> {
        &self.train_y
    }

    pub fn point_noise(&self) -> &DVector<f64> {
        &self.point_noise
    }

    /// `k(X, x)` against all training points.
    pub fn cross_cov(&self, x: &[f64]) -> Vec<f64> {
        self.train_x.iter().map(|xi| kernel_value(xi, x, &self.theta, self.kind)).collect()
    }

    /// `L⁻¹ k(X, x)`.
    pub fn whitened_cross_cov(&self, x: &[f64]) -> Vec<f64> {
        forward_solve(&self.chol, &self.cross_cov(x))
    }

    /// `(K + diag(noise))⁻¹ b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        backward_solve(&self.chol, &forward_solve(&self.chol, b))
    }

    /// Latent predictive at a single unit-cube point.
    pub fn latent(&self, x: &[f64]) -> GaussianPredict {
        let (g, _) = self.latent_with_whitened(x);
        g
    }

    /// Latent predictive together with `L⁻¹ k(X, x)`, which rank-1
    /// conditioning reuses.
    pub fn latent_with_whitened(&self, x: &[f64]) -> (GaussianPredict, Vec<f64>) {
        let k = self.cross_cov(x);
        let mean = self.theta.mean_const + k.iter().zip(self.alpha.iter()).map(|(a, b)| a * b).sum::<f64>();
        let v = forward_solve(&self.chol, &k);
        let var = self.theta.outputscale_var - v.iter().map(|a| a * a).sum::<f64>();
        (GaussianPredict::new(mean, var), v)
    }

    /// Predictive at a single point; `include_noise` adds `σ_ε²`.
    pub fn predict_point(&self, x: &[f64], include_noise: bool) -> GaussianPredict {
        let g = self.latent(x);
        if include_noise {
            g.with_noise(self.theta.noise_var)
        } else {
            g
        }
    }

    /// Predictive distributions at the rows of `x`.
    pub fn predict(&self, x: &DMatrix<f64>, include_noise: bool) -> Result<Vec<GaussianPredict>> {
        if x.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.ncols() });
        }
        Ok((0..x.nrows()).map(|i| self.predict_point(&row(x, i), include_noise)).collect())
    }

    /// Conditions on a noiseless observation `f(x_star) = f_star` through a
    /// rank-1 extension of the Cholesky factor, O(n²).
    ///
    /// If the extension breaks down (x_star already pinned by a noiseless
    /// point) the augmented system is refactorized from scratch and
    /// [`refit_fallback`](Self::refit_fallback) is set on the result.
    pub fn fantasize(&self, x_star: &[f64], f_star: f64) -> Result<GpPosterior> {
        if x_star.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x_star.len() });
        }
        if !f_star.is_finite() {
            return Err(Error::InvalidArgument(format!("fantasy value {f_star}")));
        }
        let n = self.num_train();
        let mut train_x = self.train_x.clone();
        train_x.push(x_star.to_vec());
        let train_y = self.train_y.clone().push(f_star);
        let point_noise = self.point_noise.clone().push(0.0);

        let l = self.whitened_cross_cov(x_star);
        let schur = self.theta.outputscale_var - l.iter().map(|a| a * a).sum::<f64>();
        if schur <= RANK_ONE_BREAKDOWN * self.theta.outputscale_var {
            return Self::from_parts(
                self.dataset.clone(),
                self.theta.clone(),
                self.kind,
                train_x,
                train_y,
                point_noise,
                true,
            );
        }

        let mut chol = self.chol.clone().resize(n + 1, n + 1, 0.0);
        for (j, lj) in l.iter().enumerate() {
            chol[(n, j)] = *lj;
        }
        chol[(n, n)] = schur.sqrt();
        let resid: Vec<f64> = train_y.iter().map(|y| y - self.theta.mean_const).collect();
        let alpha = DVector::from_vec(backward_solve(&chol, &forward_solve(&chol, &resid)));
        Ok(GpPosterior {
            dataset: self.dataset.clone(),
            theta: self.theta.clone(),
            kind: self.kind,
            train_x,
            train_y,
            point_noise,
            chol,
            alpha,
            jitter: self.jitter,
            refit_fallback: self.refit_fallback,
        })
    }
}

/// Exact log marginal likelihood and its gradient with respect to
/// `[log ℓ_1, …, log ℓ_D, log σ_f², log σ_ε², c]`.
pub fn log_marginal_likelihood(
    dataset: &Dataset,
    theta: &HyperParams,
    kind: KernelKind,
) -> Result<(f64, Vec<f64>)> {
    theta.validate()?;
    let dim = theta.dim();
    if dataset.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: dataset.dim() });
    }
    let n = dataset.len();
    let mut grad = vec![0.0; dim + 3];
    if n == 0 {
        return Ok((0.0, grad));
    }
    let sf2 = theta.outputscale_var;
    let x = dataset.inputs();
    let scaled: Vec<Vec<f64>> =
        (0..n).map(|i| (0..dim).map(|d| x[(i, d)] / theta.lengthscales[d]).collect()).collect();

    // one pass over pairs fills K and keeps the radial slopes for the gradient
    let mut k = DMatrix::zeros(n, n);
    let mut slopes = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        k[(a, a)] = sf2 + theta.noise_var;
        for b in (a + 1)..n {
            let r = scaled[a].iter().zip(&scaled[b]).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
            let (corr, slope) = kind.correlation_and_slope(r);
            k[(a, b)] = sf2 * corr;
            k[(b, a)] = sf2 * corr;
            slopes.push(slope);
        }
    }
    let (l, jitter) = factorize(k.clone())?;
    let resid: Vec<f64> = dataset.targets().iter().map(|y| y - theta.mean_const).collect();
    let alpha = backward_solve(&l, &forward_solve(&l, &resid));
    let quad: f64 = resid.iter().zip(&alpha).map(|(r, a)| r * a).sum();
    let logdet: f64 = (0..n).map(|i| l[(i, i)].ln()).sum();
    let value = -0.5 * quad - logdet - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();

    // W = ααᵀ - K⁻¹
    let linv = l
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or(Error::CholeskyFailed { max_jitter: jitter })?;
    let kinv = linv.tr_mul(&linv);
    let mut pair = 0;
    for a in 0..n {
        let w_aa = alpha[a] * alpha[a] - kinv[(a, a)];
        grad[dim] += 0.5 * w_aa * sf2;
        grad[dim + 1] += 0.5 * w_aa * theta.noise_var;
        for b in (a + 1)..n {
            // off-diagonal pairs count twice; the ½ cancels
            let w = alpha[a] * alpha[b] - kinv[(a, b)];
            grad[dim] += w * k[(a, b)];
            let ws = w * sf2 * slopes[pair];
            pair += 1;
            for d in 0..dim {
                let diff = scaled[a][d] - scaled[b][d];
                grad[d] += ws * diff * diff;
            }
        }
    }
    grad[dim + 2] = alpha.iter().sum();
    Ok((value, grad))
}
