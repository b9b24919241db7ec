//! Fully Bayesian Gaussian-process surrogates with statistical-distance
//! active learning (SAL) and self-correcting Bayesian optimization (SCoreBO).
//!
//! The crate is organized bottom-up:
//!
//! - [`gp`]: exact GP regression, marginal likelihood, fantasy conditioning
//!   and truncated-Gaussian moment matching.
//! - [`hyper`]: hyperparameter priors, NUTS sampling and MAP estimation.
//! - [`distances`]: Gaussian statistical distances, mixture moment matching
//!   and Monte Carlo estimators of mixture-to-Gaussian distances.
//! - [`optimum`]: pathwise posterior samples and sampled optima.
//! - [`acquisition`]: SAL, SCoreBO and baseline acquisition functions.
//! - [`benchmarks`]: synthetic tasks and evaluation metrics.
//! - [`harness`]: experiment configuration, runner, CSV output and plots.

pub mod distances;
pub mod error;
pub mod gp;
pub mod hyper;
pub mod optimum;
pub mod acquisition;
pub mod benchmarks;
pub mod harness;
pub mod qmc;
pub mod rng;

pub use error::{Error, Result};
