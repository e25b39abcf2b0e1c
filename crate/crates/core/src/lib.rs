//! Euler-principle VaR contributions for portfolio loss models given by
//! marginal densities and a copula density.
//!
//! The central estimator runs a Metropolis-Hastings chain directly on the
//! hyperplane `{x : sum x = v}` where `v` is the estimated portfolio VaR, so
//! the (unknown) density of the total loss never has to be evaluated. Monte
//! Carlo, Nadaraya-Watson and linear-regression baselines share the same
//! sample batch for comparison.

pub mod distributions;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod mcmc;
pub mod risk_models;
pub mod rng;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
