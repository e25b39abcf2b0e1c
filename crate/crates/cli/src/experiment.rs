//! The two-step pipeline: estimate VaR from one portfolio sample, then run
//! every configured allocation estimator at that level.

use std::cell::OnceCell;

use serde::Serialize;

use varcontrib_core::distributions::CopulaSpec;
use varcontrib_core::estimators::{
    gr_allocation, mc_allocation, nw_allocation, select_delta, var_order_stat, AllocationEstimate, EstimateMeta,
    SampleBatch,
};
use varcontrib_core::linalg::SpdMatrix;
use varcontrib_core::mcmc::{self, acf, minorization_check, run_chain, ChainRun, ProposalSpec};
use varcontrib_core::risk_models::{
    elliptical_true_ac, exchangeable_true_ac, validate_clt_conditions, CltValidationReport, ConditionCheck,
    ModelKind, RiskModel,
};
use varcontrib_core::rng::{stream_rng, PORTFOLIO_STREAM};

use crate::config::{CenterSource, CovSource, EstimatorConfig, ExperimentConfig, ProposalConfig};
use crate::error::CliError;

pub const ACF_LAG: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Oracle {
    pub kind: &'static str,
    pub ac: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainDiagnostics {
    pub proposal: &'static str,
    pub acceptance_rate: Option<f64>,
    /// Lag-30 sample autocorrelation of each lifted component.
    pub acf_lag30: Vec<Option<f64>>,
    pub minorization: ConditionCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorOutcome {
    pub label: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<AllocationEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bias: Option<Vec<f64>>,
    /// `sqrt(bias^2 + stderr^2)` per component.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse_proxy: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<ChainDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl EstimatorOutcome {
    pub fn is_ok(&self) -> bool {
        self.estimate.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub v_hat: f64,
    pub oracle: Option<Oracle>,
    pub estimators: Vec<EstimatorOutcome>,
    pub clt_validation: CltValidationReport,
}

impl RunReport {
    pub fn outcome(&self, label: &str) -> Option<&EstimatorOutcome> {
        self.estimators.iter().find(|e| e.label == label)
    }

    pub fn estimate(&self, label: &str) -> Option<&AllocationEstimate> {
        self.outcome(label).and_then(|o| o.estimate.as_ref())
    }
}

/// Sample, VaR and lazily computed shared quantities for one config.
pub struct Session<'a> {
    config: &'a ExperimentConfig,
    model: RiskModel,
    batch: SampleBatch,
    v: f64,
    window: OnceCell<Result<AllocationEstimate, String>>,
    gr: OnceCell<Result<AllocationEstimate, String>>,
}

impl<'a> Session<'a> {
    pub fn new(config: &'a ExperimentConfig) -> Result<Self, CliError> {
        let model = config.build_model()?;
        let mut rng = stream_rng(config.seed, PORTFOLIO_STREAM);
        let batch = model.sample_portfolio(config.n, &mut rng);
        let v = var_order_stat(batch.sums(), config.p)?;
        Ok(Self { config, model, batch, v, window: OnceCell::new(), gr: OnceCell::new() })
    }

    pub fn model(&self) -> &RiskModel {
        &self.model
    }

    pub fn batch(&self) -> &SampleBatch {
        &self.batch
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn mc_delta(&self, target_m: usize) -> Result<f64, CliError> {
        Ok(select_delta(self.batch.sums(), self.v, target_m)?)
    }

    pub fn mc(&self, target_m: usize) -> Result<AllocationEstimate, CliError> {
        Ok(mc_allocation(&self.batch, self.v, self.mc_delta(target_m)?)?)
    }

    fn window_estimate(&self) -> Result<&AllocationEstimate, CliError> {
        self.window
            .get_or_init(|| self.mc(self.config.mc_window_m).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| CliError::Estimation(format!("MC window: {e}")))
    }

    fn gr_estimate(&self) -> Result<&AllocationEstimate, CliError> {
        self.gr
            .get_or_init(|| gr_allocation(&self.batch, self.v).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| CliError::Estimation(format!("GR center: {e}")))
    }

    /// Leading `(d-1) x (d-1)` block of the MC window covariance.
    pub fn window_covariance(&self) -> Result<SpdMatrix, CliError> {
        let est = self.window_estimate()?;
        let EstimateMeta::Mc { window_cov, .. } = &est.meta else {
            unreachable!("window estimate is an MC estimate")
        };
        let k = self.model.dim() - 1;
        let rows: Vec<Vec<f64>> = window_cov[..k].iter().map(|r| r[..k].to_vec()).collect();
        SpdMatrix::from_rows(&rows)
            .map_err(|e| CliError::Estimation(format!("MC window covariance unusable as proposal covariance: {e}")))
    }

    fn covariance(&self, src: &CovSource) -> Result<SpdMatrix, CliError> {
        match src {
            CovSource::Named(_) => self.window_covariance(),
            CovSource::Matrix(m) => SpdMatrix::from_rows(m).map_err(|e| CliError::Invalid(e.to_string())),
        }
    }

    pub fn resolve_proposal(&self, p: &ProposalConfig) -> Result<ProposalSpec, CliError> {
        Ok(match p {
            ProposalConfig::Rw { cov } => ProposalSpec::random_walk(self.covariance(cov)?),
            ProposalConfig::Dirichlet { alpha } => ProposalSpec::independent_dirichlet(alpha.clone(), self.v)?,
            ProposalConfig::Mpcn { rho, center, cov } => {
                let mu = match center {
                    CenterSource::Named(_) => {
                        let gr = self.gr_estimate()?;
                        gr.ac[..self.model.dim() - 1].to_vec()
                    }
                    CenterSource::Vector(c) => c.clone(),
                };
                ProposalSpec::mpcn(*rho, mu, self.covariance(cov)?)?
            }
        })
    }

    /// Runs the chain of an MCMC estimator entry.
    pub fn chain(&self, est: &EstimatorConfig) -> Result<ChainRun, CliError> {
        let EstimatorConfig::Mcmc { proposal, n_chain, init } = est else {
            return Err(CliError::Usage("not an MCMC estimator".into()));
        };
        let proposal = proposal.as_ref().expect("resolved config carries a proposal");
        let spec = self.resolve_proposal(proposal)?;
        let n = n_chain.unwrap_or(self.config.n);
        Ok(run_chain(&self.model, self.v, &spec, n, init.clone(), self.config.seed)?)
    }

    pub fn oracle(&self) -> Option<Oracle> {
        let d = self.model.dim();
        match self.model.kind() {
            ModelKind::Elliptical(mvt) => {
                elliptical_true_ac(mvt, self.v).ok().map(|ac| Oracle { kind: "elliptical", ac })
            }
            ModelKind::CopulaJoint { marginals, copula } => {
                let same_margins = marginals.windows(2).all(|w| w[0] == w[1]);
                let exchangeable_copula = match copula {
                    CopulaSpec::RotatedClayton(_) => true,
                    CopulaSpec::T(t) => {
                        let m = t.corr().matrix();
                        let r = m[(0, 1)];
                        (0..d).all(|i| (0..d).all(|j| i == j || m[(i, j)] == r))
                    }
                };
                (same_margins && exchangeable_copula)
                    .then(|| Oracle { kind: "exchangeable", ac: exchangeable_true_ac(self.v, d) })
            }
        }
    }

    fn run_one(&self, est: &EstimatorConfig) -> Result<(AllocationEstimate, Option<ChainDiagnostics>), CliError> {
        match est {
            EstimatorConfig::Mc { target_m } => {
                Ok((self.mc(target_m.unwrap_or(self.config.mc_window_m))?, None))
            }
            EstimatorConfig::Nw { h } => Ok((nw_allocation(&self.batch, self.v, *h)?, None)),
            EstimatorConfig::Gr {} => Ok((gr_allocation(&self.batch, self.v)?, None)),
            EstimatorConfig::Mcmc { .. } => {
                let run = self.chain(est)?;
                let estimate = mcmc::mcmc_allocation(&run);
                let lag = ACF_LAG.min(run.len().saturating_sub(1));
                let acf_lag30 = (0..self.model.dim())
                    .map(|j| acf(&run.component(j), lag).ok().map(|r| r[lag]))
                    .collect();
                let diagnostics = ChainDiagnostics {
                    proposal: run.proposal().name(),
                    acceptance_rate: mcmc::acceptance_rate(&run).ok(),
                    acf_lag30,
                    minorization: minorization_check(run.proposal(), self.model.support()),
                };
                Ok((estimate, Some(diagnostics)))
            }
        }
    }

    pub fn run(&self) -> RunReport {
        let oracle = self.oracle();
        let mut seen: Vec<&str> = Vec::new();
        let estimators = self
            .config
            .estimators
            .iter()
            .map(|est| {
                let base = est.label();
                let count = seen.iter().filter(|l| **l == base).count();
                seen.push(base);
                let label = if count == 0 { base.to_string() } else { format!("{base}#{}", count + 1) };
                match self.run_one(est) {
                    Ok((estimate, diagnostics)) => {
                        let bias: Option<Vec<f64>> = oracle
                            .as_ref()
                            .map(|o| estimate.ac.iter().zip(&o.ac).map(|(a, t)| a - t).collect());
                        let rmse_proxy = match (&bias, &estimate.stderr) {
                            (Some(b), Some(s)) => Some(b.iter().zip(s).map(|(b, s)| b.hypot(*s)).collect()),
                            _ => None,
                        };
                        EstimatorOutcome {
                            label,
                            status: "ok",
                            estimate: Some(estimate),
                            bias,
                            rmse_proxy,
                            diagnostics,
                            error: None,
                        }
                    }
                    Err(e) => EstimatorOutcome {
                        label,
                        status: "failed",
                        estimate: None,
                        bias: None,
                        rmse_proxy: None,
                        diagnostics: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect();
        RunReport {
            config: self.config.clone(),
            v_hat: self.v,
            oracle,
            estimators,
            clt_validation: validate_clt_conditions(&self.model, self.config.p, self.v),
        }
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport, CliError> {
    Ok(Session::new(config)?.run())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProposalCheck {
    pub label: String,
    pub check: Result<ConditionCheck, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationOutput {
    pub v_hat: f64,
    pub clt_validation: CltValidationReport,
    pub proposals: Vec<ProposalCheck>,
}

/// CLT condition verdicts for the model and each configured MCMC proposal.
pub fn validate(config: &ExperimentConfig) -> Result<ValidationOutput, CliError> {
    let session = Session::new(config)?;
    let proposals = config
        .estimators
        .iter()
        .enumerate()
        .filter_map(|(i, e)| match e {
            EstimatorConfig::Mcmc { proposal: Some(p), .. } => Some((i, p)),
            _ => None,
        })
        .map(|(i, p)| ProposalCheck {
            label: format!("estimators[{i}]"),
            check: session
                .resolve_proposal(p)
                .map(|spec| minorization_check(&spec, session.model().support()))
                .map_err(|e| e.to_string()),
        })
        .collect();
    Ok(ValidationOutput {
        v_hat: session.v(),
        clt_validation: validate_clt_conditions(session.model(), config.p, session.v()),
        proposals,
    })
}
