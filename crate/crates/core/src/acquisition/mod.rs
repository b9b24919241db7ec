//! Acquisition functions over a fully Bayesian ensemble of GPs: statistical
//! distance active learning (SAL), self-correcting BO (SCoreBO), and the
//! BALD, BQBC, BALM, QBMGP, NEI and random baselines.

mod optimize;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::distances::{
    moment_match, DistanceSpec, Estimator, Metric, MixtureDraws, MixturePredict, QuantileGrid,
};
use crate::error::{Error, Result};
use crate::gp::{fit, std_normal_cdf, std_normal_pdf, Dataset, GaussianPredict, GpPosterior, HyperParams, KernelKind};
use crate::hyper::{nuts_sample, HyperSampleSet, MCMCConfig, PriorFamily};
use crate::optimum::{
    condition_on_optimum, sample_optima, ConditionedModel, Conditioning, MaximizeSettings, OptimumSample,
    DEFAULT_FEATURES,
};
use crate::rng::{derive_rng, derive_seed};

pub use optimize::{optimize_acquisition, AcqOptSettings};

/// Seed of the common random numbers used by Monte Carlo distance
/// estimates when no other seed is supplied.
pub const DEFAULT_MC_SEED: u64 = 0x5eed;

/// One fitted GP per hyperparameter sample, all on the same data.
#[derive(Clone, Debug)]
pub struct ModelEnsemble {
    models: Vec<GpPosterior>,
    /// Per-model best latent mean over the observed inputs.
    incumbents: Vec<f64>,
}

impl ModelEnsemble {
    pub fn fit(dataset: &Dataset, samples: &[HyperParams], kind: KernelKind) -> Result<Self> {
        let models = samples.iter().map(|t| fit(dataset, t, kind)).collect::<Result<Vec<_>>>()?;
        Self::from_posteriors(models)
    }

    pub fn from_posteriors(models: Vec<GpPosterior>) -> Result<Self> {
        let Some(first) = models.first() else {
            return Err(Error::InvalidArgument("an ensemble needs at least one model".into()));
        };
        if models.iter().any(|m| m.dataset() != first.dataset()) {
            return Err(Error::InvalidArgument("ensemble members must share one dataset".into()));
        }
        let incumbents = models
            .iter()
            .map(|m| {
                let ds = m.dataset();
                (0..ds.len()).map(|i| m.latent(&ds.point(i)).mean).fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        Ok(Self { models, incumbents })
    }

    pub fn models(&self) -> &[GpPosterior] {
        &self.models
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.models[0].dim()
    }

    pub fn dataset(&self) -> &Dataset {
        self.models[0].dataset()
    }

    /// Latent predictive of every model at `x`, with `L⁻¹ k(X, x)`.
    fn latents(&self, x: &[f64]) -> Vec<(GaussianPredict, Vec<f64>)> {
        self.models.iter().map(|m| m.latent_with_whitened(x)).collect()
    }

    /// Mean over models of the latent posterior mean.
    pub fn mean_latent(&self, x: &[f64]) -> f64 {
        self.models.iter().map(|m| m.latent(x).mean).sum::<f64>() / self.len() as f64
    }
}

fn noisy_components(ens: &ModelEnsemble, latents: &[(GaussianPredict, Vec<f64>)]) -> Vec<GaussianPredict> {
    ens.models.iter().zip(latents).map(|(m, (g, _))| g.with_noise(m.theta().noise_var)).collect()
}

/// Equal-weight mixture of the models' noise-inclusive predictives at `x`.
pub fn marginal_predict(ens: &ModelEnsemble, x: &[f64]) -> MixturePredict {
    let comps = ens.models.iter().map(|m| m.predict_point(x, true)).collect();
    MixturePredict::new(comps).expect("ensembles are never empty")
}

/// A mixture prepared for repeated distance evaluations against Gaussians.
enum Reference {
    Moment(GaussianPredict),
    Draws(MixtureDraws),
    Quantiles(QuantileGrid),
}

impl Reference {
    fn new(mix: MixturePredict, spec: &DistanceSpec, seed: u64) -> Self {
        match (spec.estimator, spec.metric) {
            (Estimator::MomentMatch, _) => Reference::Moment(moment_match(&mix)),
            (Estimator::MonteCarlo { samples }, Metric::Hellinger) => {
                Reference::Draws(MixtureDraws::new(&mix, samples, seed))
            }
            (Estimator::MonteCarlo { samples }, Metric::Wasserstein2) => match QuantileGrid::new(&mix, samples) {
                Ok(grid) => Reference::Quantiles(grid),
                Err(_) => Reference::Moment(moment_match(&mix)),
            },
            // rejected by `DistanceSpec::validate`
            (Estimator::MonteCarlo { .. }, Metric::Kl) => Reference::Moment(moment_match(&mix)),
        }
    }

    /// Distance from the Gaussian `q` to the mixture; KL is `KL(q ‖ mixture)`.
    fn distance(&self, spec: &DistanceSpec, q: &GaussianPredict) -> f64 {
        match self {
            Reference::Moment(mm) => spec.gaussian(q, mm),
            Reference::Draws(draws) => draws.hellinger(q).value,
            Reference::Quantiles(grid) => grid.wasserstein2(q),
        }
    }
}

fn mean_distance(mix: MixturePredict, conds: &[GaussianPredict], spec: &DistanceSpec, seed: u64) -> f64 {
    let reference = Reference::new(mix, spec, seed);
    conds.iter().map(|q| reference.distance(spec, q)).sum::<f64>() / conds.len() as f64
}

/// SAL: mean distance between each model's predictive and the marginal.
pub fn sal_value(ens: &ModelEnsemble, x: &[f64], distance: &DistanceSpec) -> f64 {
    sal_from(ens, &ens.latents(x), distance, DEFAULT_MC_SEED)
}

fn sal_from(ens: &ModelEnsemble, latents: &[(GaussianPredict, Vec<f64>)], spec: &DistanceSpec, seed: u64) -> f64 {
    let comps = noisy_components(ens, latents);
    let mix = MixturePredict::new(comps.clone()).expect("non-empty");
    mean_distance(mix, &comps, spec, seed)
}

/// SCoreBO: mean distance between the marginal predictive and every
/// optimum-conditioned model predictive, with the marginal taken as the
/// mixture of all the conditionals. `conditionals[m]` holds the
/// conditionals built from model `m`.
pub fn scorebo_value(
    ens: &ModelEnsemble,
    conditionals: &[Vec<ConditionedModel<'_>>],
    x: &[f64],
    distance: &DistanceSpec,
) -> f64 {
    scorebo_from(conditionals, x, &ens.latents(x), distance, DEFAULT_MC_SEED)
}

fn scorebo_from(
    conditionals: &[Vec<ConditionedModel<'_>>],
    x: &[f64],
    latents: &[(GaussianPredict, Vec<f64>)],
    spec: &DistanceSpec,
    seed: u64,
) -> f64 {
    let conds: Vec<GaussianPredict> = conditionals
        .iter()
        .zip(latents)
        .flat_map(|(cs, (g, w))| cs.iter().map(move |c| c.predict_from(x, *g, w)))
        .collect();
    if conds.is_empty() {
        return 0.0;
    }
    // p(y | D) = E_{θ, x*, f*}[p(y | θ, x*, f*, D)], estimated by the mixture
    // of the same conditionals that enter the average.
    let mix = MixturePredict::new(conds.clone()).expect("non-empty");
    mean_distance(mix, &conds, spec, seed)
}

/// BALD with the moment-matched marginal entropy:
/// `H(MM(mixture)) − mean_m H(p_m)`.
pub fn bald_value(ens: &ModelEnsemble, x: &[f64]) -> f64 {
    bald_of(&marginal_predict(ens, x))
}

fn bald_of(mix: &MixturePredict) -> f64 {
    let mm = moment_match(mix);
    let cond = mix.components().iter().map(GaussianPredict::entropy).sum::<f64>() / mix.len() as f64;
    (mm.entropy() - cond).max(0.0)
}

/// BQBC: population variance of the model means.
pub fn bqbc_value(ens: &ModelEnsemble, x: &[f64]) -> f64 {
    bqbc_of(&marginal_predict(ens, x))
}

fn bqbc_of(mix: &MixturePredict) -> f64 {
    let mean = mix.mean();
    mix.components().iter().map(|g| (g.mean - mean).powi(2)).sum::<f64>() / mix.len() as f64
}

/// BALM: variance of the marginal predictive.
pub fn balm_value(ens: &ModelEnsemble, x: &[f64]) -> f64 {
    moment_match(&marginal_predict(ens, x)).var
}

/// QBMGP: BQBC plus BALM.
pub fn qbmgp_value(ens: &ModelEnsemble, x: &[f64]) -> f64 {
    let mix = marginal_predict(ens, x);
    bqbc_of(&mix) + moment_match(&mix).var
}

/// Expected improvement of a Gaussian over `incumbent`.
pub fn expected_improvement(g: &GaussianPredict, incumbent: f64) -> f64 {
    let gap = g.mean - incumbent;
    let sd = g.std();
    if sd < 1e-12 {
        return gap.max(0.0);
    }
    let z = gap / sd;
    (gap * std_normal_cdf(z) + sd * std_normal_pdf(z)).max(0.0)
}

/// Noisy EI: the average over models of latent EI against each model's best
/// latent mean at the observed inputs.
pub fn nei_value(ens: &ModelEnsemble, x: &[f64]) -> Result<f64> {
    if ens.dataset().is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(nei_from(ens, &ens.latents(x)))
}

fn nei_from(ens: &ModelEnsemble, latents: &[(GaussianPredict, Vec<f64>)]) -> f64 {
    latents.iter().zip(&ens.incumbents).map(|((g, _), inc)| expected_improvement(g, *inc)).sum::<f64>()
        / latents.len() as f64
}

/// Query-selection strategies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcquisitionKind {
    Sal,
    #[default]
    Scorebo,
    Bald,
    Balm,
    Bqbc,
    Qbmgp,
    Nei,
    /// Uniformly random queries; the surrogate is still fitted for reporting.
    Random,
}

impl AcquisitionKind {
    pub fn name(&self) -> &'static str {
        match self {
            AcquisitionKind::Sal => "sal",
            AcquisitionKind::Scorebo => "scorebo",
            AcquisitionKind::Bald => "bald",
            AcquisitionKind::Balm => "balm",
            AcquisitionKind::Bqbc => "bqbc",
            AcquisitionKind::Qbmgp => "qbmgp",
            AcquisitionKind::Nei => "nei",
            AcquisitionKind::Random => "random",
        }
    }
}

/// Full description of an acquisition strategy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcquisitionSpec {
    pub kind: AcquisitionKind,
    /// Distance used by SAL and SCoreBO.
    pub distance: DistanceSpec,
    /// Optima sampled per hyperparameter sample (SCoreBO).
    pub num_optima: usize,
    pub conditioning: Conditioning,
    /// Random features per function sample (SCoreBO).
    pub features: usize,
    pub sample_maximizer: MaximizeSettings,
    pub optimizer: AcqOptSettings,
}

impl Default for AcquisitionSpec {
    fn default() -> Self {
        Self {
            kind: AcquisitionKind::Scorebo,
            distance: DistanceSpec::moment_matched(Metric::Hellinger),
            num_optima: 8,
            conditioning: Conditioning::Joint,
            features: DEFAULT_FEATURES,
            sample_maximizer: MaximizeSettings::default(),
            optimizer: AcqOptSettings::default(),
        }
    }
}

impl AcquisitionSpec {
    pub fn of_kind(kind: AcquisitionKind) -> Self {
        Self { kind, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        self.distance.validate()?;
        if self.kind == AcquisitionKind::Scorebo && self.num_optima == 0 {
            return Err(Error::InvalidArgument("SCoreBO needs at least one optimum per model".into()));
        }
        if self.kind == AcquisitionKind::Scorebo && self.features == 0 {
            return Err(Error::InvalidArgument("SCoreBO needs at least one random feature".into()));
        }
        Ok(())
    }
}

/// An acquisition function ready for evaluation: the ensemble plus any
/// sampled optima and their conditional models.
pub struct Acquisition<'a> {
    spec: AcquisitionSpec,
    ensemble: &'a ModelEnsemble,
    optima: Vec<Vec<OptimumSample>>,
    conditionals: Vec<Vec<ConditionedModel<'a>>>,
    mc_seed: u64,
}

impl<'a> Acquisition<'a> {
    /// Prepares `spec` on `ensemble`; SCoreBO draws `num_optima` optima per
    /// model here, with sub-seeds derived from `seed`.
    pub fn build(ensemble: &'a ModelEnsemble, spec: &AcquisitionSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        if spec.kind == AcquisitionKind::Nei && ensemble.dataset().is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut optima = Vec::new();
        let mut conditionals = Vec::new();
        if spec.kind == AcquisitionKind::Scorebo {
            for (m, model) in ensemble.models.iter().enumerate() {
                let opts = sample_optima(
                    model,
                    spec.num_optima,
                    spec.features,
                    &spec.sample_maximizer,
                    derive_seed(seed, "optima", &[m as u64]),
                )?;
                conditionals.push(
                    opts.iter()
                        .map(|o| condition_on_optimum(model, o, spec.conditioning))
                        .collect::<Result<Vec<_>>>()?,
                );
                optima.push(opts);
            }
        }
        Ok(Self { spec: *spec, ensemble, optima, conditionals, mc_seed: derive_seed(seed, "mc", &[]) })
    }

    pub fn spec(&self) -> &AcquisitionSpec {
        &self.spec
    }

    /// Sampled optima, grouped by model (SCoreBO only).
    pub fn optima(&self) -> &[Vec<OptimumSample>] {
        &self.optima
    }

    pub fn conditionals(&self) -> &[Vec<ConditionedModel<'a>>] {
        &self.conditionals
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let ens = self.ensemble;
        match self.spec.kind {
            AcquisitionKind::Sal => sal_from(ens, &ens.latents(x), &self.spec.distance, self.mc_seed),
            AcquisitionKind::Scorebo => {
                scorebo_from(&self.conditionals, x, &ens.latents(x), &self.spec.distance, self.mc_seed)
            }
            AcquisitionKind::Bald => bald_value(ens, x),
            AcquisitionKind::Balm => balm_value(ens, x),
            AcquisitionKind::Bqbc => bqbc_value(ens, x),
            AcquisitionKind::Qbmgp => qbmgp_value(ens, x),
            AcquisitionKind::Nei => nei_from(ens, &ens.latents(x)),
            AcquisitionKind::Random => 0.0,
        }
    }
}

/// Next query chosen by an acquisition strategy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub point: Vec<f64>,
    /// Acquisition value at `point` (zero for random queries).
    pub value: f64,
}

/// Builds the acquisition for `spec` and maximizes it over the unit cube.
/// Random queries are drawn uniformly from a stream derived from `seed`.
pub fn select_next(ensemble: &ModelEnsemble, spec: &AcquisitionSpec, seed: u64) -> Result<Selection> {
    let dim = ensemble.dim();
    if spec.kind == AcquisitionKind::Random {
        let mut rng = derive_rng(seed, "random-query", &[]);
        return Ok(Selection { point: (0..dim).map(|_| rng.random::<f64>()).collect(), value: 0.0 });
    }
    let acq = Acquisition::build(ensemble, spec, seed)?;
    let (point, value) =
        optimize_acquisition(|x| acq.value(x), dim, &spec.optimizer, derive_seed(seed, "acq-opt", &[]))?;
    Ok(Selection { point, value })
}

/// Result of one full fully-Bayesian iteration.
#[derive(Clone, Debug)]
pub struct IterationOutcome {
    pub selection: Selection,
    pub hyper_samples: HyperSampleSet,
}

/// One complete iteration: sample hyperparameters with NUTS, fit one GP per
/// sample, build the acquisition (drawing optima for SCoreBO) and maximize it.
pub fn scorebo_iteration(
    dataset: &Dataset,
    prior: &PriorFamily,
    mcmc: &MCMCConfig,
    spec: &AcquisitionSpec,
    kind: KernelKind,
    seed: u64,
) -> Result<IterationOutcome> {
    let cfg = MCMCConfig { seed: derive_seed(seed, "mcmc", &[]), ..*mcmc };
    let hyper_samples = nuts_sample(dataset, prior, &cfg, kind)?;
    let ensemble = ModelEnsemble::fit(dataset, &hyper_samples.samples, kind)?;
    let selection = select_next(&ensemble, spec, derive_seed(seed, "select", &[]))?;
    Ok(IterationOutcome { selection, hyper_samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::gaussian_kl;
    use nalgebra::{DMatrix, DVector};

    fn dataset() -> Dataset {
        let xs = [0.1, 0.35, 0.5, 0.8];
        let ys = [0.2, -0.4, 1.0, 0.3];
        Dataset::unit(DMatrix::from_column_slice(4, 1, &xs), DVector::from_column_slice(&ys)).unwrap()
    }

    fn ensemble(thetas: &[(f64, f64, f64)]) -> ModelEnsemble {
        let samples: Vec<HyperParams> =
            thetas.iter().map(|&(l, s, n)| HyperParams::new(vec![l], s, n, 0.0).unwrap()).collect();
        ModelEnsemble::fit(&dataset(), &samples, KernelKind::Matern52).unwrap()
    }

    fn mixed() -> ModelEnsemble {
        ensemble(&[(0.1, 1.0, 0.01), (0.3, 2.0, 0.2), (0.05, 0.5, 0.05)])
    }

    #[test]
    fn single_model_marginal_matches_predict() {
        let ens = ensemble(&[(0.2, 1.0, 0.1)]);
        let mix = marginal_predict(&ens, &[0.4]);
        assert_eq!(mix.components()[0], ens.models()[0].predict_point(&[0.4], true));
        assert_eq!(sal_value(&ens, &[0.4], &DistanceSpec::default()), 0.0);
        assert_eq!(bald_value(&ens, &[0.4]), 0.0);
        assert!((balm_value(&ens, &[0.4]) - mix.components()[0].var).abs() < 1e-15);
        assert_eq!(qbmgp_value(&ens, &[0.4]), balm_value(&ens, &[0.4]));
    }

    #[test]
    fn identical_models_give_zero_disagreement() {
        let ens = ensemble(&[(0.2, 1.0, 0.1); 3]);
        for metric in [Metric::Hellinger, Metric::Wasserstein2, Metric::Kl] {
            assert!(sal_value(&ens, &[0.7], &DistanceSpec::moment_matched(metric)).abs() < 1e-7);
        }
        assert!(bqbc_value(&ens, &[0.7]).abs() < 1e-20);
    }

    #[test]
    fn sal_kl_equals_bald() {
        let ens = mixed();
        for i in 0..=20 {
            let x = [i as f64 / 20.0];
            let sal = sal_value(&ens, &x, &DistanceSpec::moment_matched(Metric::Kl));
            assert!((sal - bald_value(&ens, &x)).abs() < 1e-9);
        }
    }

    #[test]
    fn hand_computed_mixture_values() {
        let mix = MixturePredict::new(vec![GaussianPredict::new(0.0, 1.0), GaussianPredict::new(2.0, 1.0)]).unwrap();
        assert!((bald_of(&mix) - 0.5 * 2f64.ln()).abs() < 1e-12);
        assert!((bqbc_of(&mix) - 1.0).abs() < 1e-15);
        assert!((moment_match(&mix).var - 2.0).abs() < 1e-15);
        let comps = mix.components().to_vec();
        let kl = comps.iter().map(|c| gaussian_kl(c, &moment_match(&mix))).sum::<f64>() / 2.0;
        assert!((kl - bald_of(&mix)).abs() < 1e-12);
    }

    #[test]
    fn values_are_finite_and_nonnegative() {
        let ens = mixed();
        let specs = [
            AcquisitionSpec::of_kind(AcquisitionKind::Sal),
            AcquisitionSpec { features: 256, num_optima: 2, ..AcquisitionSpec::default() },
            AcquisitionSpec::of_kind(AcquisitionKind::Bald),
            AcquisitionSpec::of_kind(AcquisitionKind::Balm),
            AcquisitionSpec::of_kind(AcquisitionKind::Bqbc),
            AcquisitionSpec::of_kind(AcquisitionKind::Qbmgp),
            AcquisitionSpec::of_kind(AcquisitionKind::Nei),
        ];
        for spec in specs {
            let acq = Acquisition::build(&ens, &spec, 1).unwrap();
            for i in 0..=50 {
                let v = acq.value(&[i as f64 / 50.0]);
                assert!(v.is_finite() && v >= 0.0, "{:?} at {i}: {v}", spec.kind);
            }
        }
    }

    #[test]
    fn scorebo_is_nonzero_for_a_single_model() {
        let ens = ensemble(&[(0.2, 1.0, 0.05)]);
        let model = &ens.models()[0];
        let opts = [OptimumSample { x_star: vec![0.65], f_star: 1.5 }, OptimumSample { x_star: vec![0.05], f_star: 0.6 }];
        let build = |c| vec![opts.iter().map(|o| condition_on_optimum(model, o, c).unwrap()).collect::<Vec<_>>()];
        let joint = build(Conditioning::Joint);
        let spec = DistanceSpec::default();
        assert_eq!(sal_value(&ens, &[0.65], &spec), 0.0);
        assert!(scorebo_value(&ens, &joint, &[0.65], &spec) > 0.1);
        assert!(scorebo_value(&ens, &joint, &[0.65], &spec) > scorebo_value(&ens, &joint, &[0.35], &spec));
        // a single conditional is its own marginal
        let one = vec![vec![condition_on_optimum(model, &opts[0], Conditioning::Joint).unwrap()]];
        assert_eq!(scorebo_value(&ens, &one, &[0.65], &spec), 0.0);
        let value_only = build(Conditioning::ValueOnly);
        assert!(scorebo_value(&ens, &joint, &[0.65], &spec) >= scorebo_value(&ens, &value_only, &[0.65], &spec));
    }

    #[test]
    fn nei_behaviour() {
        let ens = mixed();
        let mc = {
            let g = ens.models()[0].latent(&[0.6]);
            let inc = ens.incumbents[0];
            let mut rng = crate::rng::rng_from_seed(0);
            let n = 1_000_000;
            let s: f64 = (0..n)
                .map(|_| {
                    let z: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
                    (g.mean + g.std() * z - inc).max(0.0)
                })
                .sum();
            (s / n as f64, expected_improvement(&g, inc))
        };
        assert!((mc.0 - mc.1).abs() < 0.01 * mc.1.max(1e-3), "{mc:?}");
        assert!(expected_improvement(&GaussianPredict::new(-5.0, 1e-6), 0.0) < 1e-12);
        let empty = ModelEnsemble::fit(&Dataset::empty(1), &[HyperParams::unit(1)], KernelKind::Matern52).unwrap();
        assert!(nei_value(&empty, &[0.5]).is_err());
    }

    #[test]
    fn permutation_invariance() {
        let a = mixed();
        let b = ensemble(&[(0.05, 0.5, 0.05), (0.1, 1.0, 0.01), (0.3, 2.0, 0.2)]);
        for x in [[0.2], [0.6], [0.95]] {
            for metric in [Metric::Hellinger, Metric::Wasserstein2, Metric::Kl] {
                let s = DistanceSpec::moment_matched(metric);
                assert!((sal_value(&a, &x, &s) - sal_value(&b, &x, &s)).abs() < 1e-12);
            }
            assert!((bqbc_value(&a, &x) - bqbc_value(&b, &x)).abs() < 1e-12);
        }
    }

    #[test]
    fn select_next_is_deterministic() {
        let ens = mixed();
        let spec = AcquisitionSpec { features: 128, num_optima: 2, ..AcquisitionSpec::default() };
        let a = select_next(&ens, &spec, 3).unwrap();
        assert_eq!(a, select_next(&ens, &spec, 3).unwrap());
        assert!(a.point.iter().all(|v| (0.0..=1.0).contains(v)));
        let r = select_next(&ens, &AcquisitionSpec::of_kind(AcquisitionKind::Random), 3).unwrap();
        assert_eq!(r, select_next(&ens, &AcquisitionSpec::of_kind(AcquisitionKind::Random), 3).unwrap());
    }
}
