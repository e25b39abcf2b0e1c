//! Experiment configuration: TOML (or JSON) schema, presets and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use varcontrib_core::distributions::{CopulaSpec, MarginalSpec, MvtSpec};
use varcontrib_core::linalg::SpdMatrix;
use varcontrib_core::risk_models::RiskModel;

use crate::error::CliError;

const PRESETS: [(&str, &str); 4] = [
    ("model1", include_str!("../presets/model1.toml")),
    ("model2", include_str!("../presets/model2.toml")),
    ("model3", include_str!("../presets/model3.toml")),
    ("model4", include_str!("../presets/model4.toml")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarginalConfig {
    Pareto { kappa: f64, gamma: f64 },
    StudentT {
        nu: f64,
        #[serde(default)]
        mu: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CopulaConfig {
    RotatedClayton { theta: f64 },
    T { nu: f64, corr: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpecConfig {
    Copula { marginals: Vec<MarginalConfig>, copula: CopulaConfig },
    Mvt {
        nu: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<Vec<f64>>,
        sigma: Vec<Vec<f64>>,
    },
}

/// `model = "model1"` or an inline `[model]` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ModelRef {
    Preset(String),
    Inline(ModelSpecConfig),
}

impl<'de> Deserialize<'de> for ModelRef {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RefVisitor;
        impl<'de> Visitor<'de> for RefVisitor {
            type Value = ModelRef;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a preset name ({}) or a model table", preset_names().join(", "))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ModelRef, E> {
                Ok(ModelRef::Preset(v.to_string()))
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<ModelRef, A::Error> {
                ModelSpecConfig::deserialize(de::value::MapAccessDeserializer::new(map)).map(ModelRef::Inline)
            }
        }
        deserializer.deserialize_any(RefVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Named {
    McWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterName {
    Gr,
}

/// Covariance source for a proposal: the MC window covariance or a literal matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CovSource {
    Named(Named),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CenterSource {
    Named(CenterName),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProposalConfig {
    Rw {
        #[serde(default = "mc_window")]
        cov: CovSource,
    },
    Dirichlet { alpha: Vec<f64> },
    Mpcn {
        #[serde(default = "default_rho")]
        rho: f64,
        #[serde(default = "gr_center")]
        center: CenterSource,
        #[serde(default = "mc_window")]
        cov: CovSource,
    },
}

fn mc_window() -> CovSource {
    CovSource::Named(Named::McWindow)
}

fn gr_center() -> CenterSource {
    CenterSource::Named(CenterName::Gr)
}

fn default_rho() -> f64 {
    0.8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorConfig {
    Mc {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target_m: Option<usize>,
    },
    Nw {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h: Option<f64>,
    },
    Gr {},
    Mcmc {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        proposal: Option<ProposalConfig>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_chain: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        init: Option<Vec<f64>>,
    },
}

impl EstimatorConfig {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Mc { .. } => "MC",
            Self::Nw { .. } => "NW",
            Self::Gr {} => "GR",
            Self::Mcmc { .. } => "MCMC",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
}

/// A config as written by the user, before defaults are applied.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: ModelRef,
    p: f64,
    n: usize,
    seed: u64,
    #[serde(default)]
    estimators: Option<Vec<EstimatorConfig>>,
    #[serde(default)]
    outputs: OutputsConfig,
    #[serde(default)]
    mc_window_m: Option<usize>,
    #[serde(default)]
    preset: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PresetFile {
    model: ModelSpecConfig,
    proposal: ProposalConfig,
}

/// Fully resolved experiment description; serializes back to an equivalent
/// config.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub model: ModelSpecConfig,
    pub p: f64,
    pub n: usize,
    pub seed: u64,
    /// Window size used to build the MC-window covariance for proposals.
    pub mc_window_m: usize,
    pub estimators: Vec<EstimatorConfig>,
    pub outputs: OutputsConfig,
}

impl ExperimentConfig {
    pub fn dim(&self) -> usize {
        match &self.model {
            ModelSpecConfig::Copula { marginals, .. } => marginals.len(),
            ModelSpecConfig::Mvt { sigma, .. } => sigma.len(),
        }
    }

    pub fn build_model(&self) -> Result<RiskModel, CliError> {
        build_model(&self.model)
    }

    /// The same config under another seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    /// Resolved config in the input schema, as TOML text.
    pub fn to_toml(&self) -> String {
        #[derive(Serialize)]
        struct Echo<'a> {
            #[serde(skip_serializing_if = "Option::is_none")]
            preset: Option<&'a str>,
            p: f64,
            n: usize,
            seed: u64,
            mc_window_m: usize,
            model: &'a ModelSpecConfig,
            estimators: &'a [EstimatorConfig],
            outputs: &'a OutputsConfig,
        }
        toml::to_string(&Echo {
            preset: self.preset.as_deref(),
            p: self.p,
            n: self.n,
            seed: self.seed,
            mc_window_m: self.mc_window_m,
            model: &self.model,
            estimators: &self.estimators,
            outputs: &self.outputs,
        })
        .expect("config serializes")
    }
}

pub fn default_target_m(n: usize) -> usize {
    ((1e-3 * n as f64).round() as usize).max(10).min(n)
}

fn load_preset(name: &str) -> Result<PresetFile, CliError> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| CliError::Config(format!("unknown preset '{name}'; expected one of {}", preset_names().join(", "))))?;
    toml::from_str(text).map_err(|e| CliError::Config(format!("preset {name}: {e}")))
}

pub fn parse_config_file(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        parse_config_json(&text)
    } else {
        parse_config(&text)
    }
}

/// Parses and resolves a TOML config.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    resolve(raw)
}

pub fn parse_config_json(text: &str) -> Result<ExperimentConfig, CliError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<ExperimentConfig, CliError> {
    if !(raw.p > 0.0 && raw.p < 1.0) {
        return Err(CliError::Invalid(format!("p must lie in (0, 1), got {}", raw.p)));
    }
    let min_n = (10.0 / (1.0 - raw.p)).ceil();
    if (raw.n as f64) < min_n {
        return Err(CliError::Invalid(format!(
            "n = {} is too small for p = {}; need n >= 10/(1-p) = {min_n}",
            raw.n, raw.p
        )));
    }
    let (preset, model, preset_proposal) = match raw.model {
        ModelRef::Preset(name) => {
            let file = load_preset(&name)?;
            (Some(name), file.model, Some(file.proposal))
        }
        ModelRef::Inline(m) => (raw.preset, m, None),
    };
    let built = build_model(&model)?;
    let d = built.dim();

    let estimators = raw.estimators.unwrap_or_else(|| {
        vec![
            EstimatorConfig::Mc { target_m: None },
            EstimatorConfig::Nw { h: None },
            EstimatorConfig::Gr {},
            EstimatorConfig::Mcmc { proposal: None, n_chain: None, init: None },
        ]
    });
    let mut resolved = Vec::with_capacity(estimators.len());
    for est in estimators {
        resolved.push(match est {
            EstimatorConfig::Mc { target_m } => {
                let m = target_m.unwrap_or_else(|| default_target_m(raw.n));
                if m < 1 || m > raw.n {
                    return Err(CliError::Invalid(format!("MC target_m must lie in [1, n], got {m}")));
                }
                EstimatorConfig::Mc { target_m: Some(m) }
            }
            EstimatorConfig::Nw { h } => {
                if let Some(h) = h {
                    if !(h > 0.0 && h.is_finite()) {
                        return Err(CliError::Invalid(format!("NW bandwidth must be positive, got {h}")));
                    }
                }
                EstimatorConfig::Nw { h }
            }
            EstimatorConfig::Gr {} => EstimatorConfig::Gr {},
            EstimatorConfig::Mcmc { proposal, n_chain, init } => {
                let proposal = proposal
                    .or_else(|| preset_proposal.clone())
                    .unwrap_or(ProposalConfig::Rw { cov: mc_window() });
                check_proposal(&proposal, d)?;
                let n_chain = n_chain.unwrap_or(raw.n);
                if n_chain < 1 {
                    return Err(CliError::Invalid("MCMC n_chain must be at least 1".into()));
                }
                if let Some(x) = &init {
                    if x.len() != d - 1 {
                        return Err(CliError::Invalid(format!(
                            "MCMC init must have {} coordinates, got {}",
                            d - 1,
                            x.len()
                        )));
                    }
                }
                EstimatorConfig::Mcmc { proposal: Some(proposal), n_chain: Some(n_chain), init }
            }
        });
    }
    let mc_window_m = raw.mc_window_m.unwrap_or_else(|| {
        resolved
            .iter()
            .find_map(|e| match e {
                EstimatorConfig::Mc { target_m } => *target_m,
                _ => None,
            })
            .unwrap_or_else(|| default_target_m(raw.n))
    });
    if mc_window_m < 2 || mc_window_m > raw.n {
        return Err(CliError::Invalid(format!("mc_window_m must lie in [2, n], got {mc_window_m}")));
    }
    Ok(ExperimentConfig {
        preset,
        model,
        p: raw.p,
        n: raw.n,
        seed: raw.seed,
        mc_window_m,
        estimators: resolved,
        outputs: raw.outputs,
    })
}

fn spd(rows: &[Vec<f64>], what: &str) -> Result<SpdMatrix, CliError> {
    SpdMatrix::from_rows(rows).map_err(|e| CliError::Invalid(format!("{what}: {e}")))
}

fn check_proposal(p: &ProposalConfig, d: usize) -> Result<(), CliError> {
    let check_cov = |c: &CovSource| -> Result<(), CliError> {
        if let CovSource::Matrix(m) = c {
            let s = spd(m, "proposal covariance")?;
            if s.dim() != d - 1 {
                return Err(CliError::Invalid(format!("proposal covariance must be {0}x{0}", d - 1)));
            }
        }
        Ok(())
    };
    match p {
        ProposalConfig::Rw { cov } => check_cov(cov),
        ProposalConfig::Dirichlet { alpha } => {
            if alpha.len() != d {
                return Err(CliError::Invalid(format!(
                    "Dirichlet alpha must have {d} entries, got {}",
                    alpha.len()
                )));
            }
            if alpha.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                return Err(CliError::Invalid("Dirichlet alpha entries must be positive".into()));
            }
            Ok(())
        }
        ProposalConfig::Mpcn { rho, center, cov } => {
            if !(*rho > 0.0 && *rho < 1.0) {
                return Err(CliError::Invalid(format!("MpCN rho must lie in (0, 1), got {rho}")));
            }
            if let CenterSource::Vector(c) = center {
                if c.len() != d - 1 {
                    return Err(CliError::Invalid(format!("MpCN center must have {} entries", d - 1)));
                }
            }
            check_cov(cov)
        }
    }
}

pub fn build_model(m: &ModelSpecConfig) -> Result<RiskModel, CliError> {
    let invalid = |e: varcontrib_core::Error| CliError::Invalid(format!("model: {e}"));
    match m {
        ModelSpecConfig::Copula { marginals, copula } => {
            let margs = marginals
                .iter()
                .map(|mc| match mc {
                    MarginalConfig::Pareto { kappa, gamma } => MarginalSpec::pareto(*kappa, *gamma),
                    MarginalConfig::StudentT { nu, mu, sigma } => MarginalSpec::student_t(*nu, *mu, *sigma),
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(invalid)?;
            let cop = match copula {
                CopulaConfig::RotatedClayton { theta } => CopulaSpec::rotated_clayton(*theta, margs.len()),
                CopulaConfig::T { nu, corr } => CopulaSpec::t(*nu, spd(corr, "copula correlation")?),
            }
            .map_err(invalid)?;
            RiskModel::copula_joint(margs, cop).map_err(invalid)
        }
        ModelSpecConfig::Mvt { nu, mu, sigma } => {
            let scale = spd(sigma, "mvt scale")?;
            let mu = mu.clone().unwrap_or_else(|| vec![0.0; scale.dim()]);
            RiskModel::elliptical(MvtSpec::new(*nu, mu, scale).map_err(invalid)?).map_err(invalid)
        }
    }
}
