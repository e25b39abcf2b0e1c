//! Configuration-driven experiments for VaR contribution estimators: one
//! portfolio sample yields the VaR level and the MC, NW and GR baselines;
//! MCMC chains then target the conditional law at that level.

pub mod compare;
pub mod config;
pub mod error;
pub mod experiment;
pub mod export;
pub mod report;

pub use config::{parse_config, parse_config_file, ExperimentConfig};
pub use error::CliError;
pub use experiment::{run_experiment, RunReport, Session};
