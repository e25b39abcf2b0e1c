//! Joint loss models, the conditional target on the sum hyperplane, and the
//! closed-form allocation oracles.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::distributions::{CopulaSpec, MarginalSpec, MvtSpec};
use crate::error::{Error, Result};
use crate::estimators::SampleBatch;
use crate::linalg::SpdMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportKind {
    /// Losses live on the nonnegative orthant.
    PureLoss,
    /// Profits and losses on the whole space.
    ProfitAndLoss,
}

#[derive(Debug, Clone)]
pub enum ModelKind {
    /// Sklar density: `c(F_1(x_1), ..., F_d(x_d)) * prod f_j(x_j)`.
    CopulaJoint { marginals: Vec<MarginalSpec>, copula: CopulaSpec },
    Elliptical(MvtSpec),
}

/// A validated portfolio loss model of dimension `d >= 3`.
#[derive(Debug, Clone)]
pub struct RiskModel {
    kind: ModelKind,
    support: SupportKind,
}

impl RiskModel {
    pub fn copula_joint(marginals: Vec<MarginalSpec>, copula: CopulaSpec) -> Result<Self> {
        if marginals.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "portfolio dimension must be at least 3, got {}",
                marginals.len()
            )));
        }
        if copula.dim() != marginals.len() {
            return Err(Error::DimensionMismatch { expected: marginals.len(), got: copula.dim() });
        }
        let support = if marginals.iter().all(MarginalSpec::is_nonnegative) {
            SupportKind::PureLoss
        } else {
            SupportKind::ProfitAndLoss
        };
        Ok(Self { kind: ModelKind::CopulaJoint { marginals, copula }, support })
    }

    pub fn elliptical(mvt: MvtSpec) -> Result<Self> {
        if mvt.dim() < 3 {
            return Err(Error::InvalidParameter(format!(
                "portfolio dimension must be at least 3, got {}",
                mvt.dim()
            )));
        }
        Ok(Self { kind: ModelKind::Elliptical(mvt), support: SupportKind::ProfitAndLoss })
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn support(&self) -> SupportKind {
        self.support
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ModelKind::CopulaJoint { marginals, .. } => marginals.len(),
            ModelKind::Elliptical(m) => m.dim(),
        }
    }

    pub fn as_elliptical(&self) -> Option<&MvtSpec> {
        match &self.kind {
            ModelKind::Elliptical(m) => Some(m),
            _ => None,
        }
    }

    /// Componentwise mean of the loss vector, when it exists.
    pub fn mean(&self) -> Option<Vec<f64>> {
        match &self.kind {
            ModelKind::CopulaJoint { marginals, .. } => marginals.iter().map(MarginalSpec::mean).collect(),
            ModelKind::Elliptical(m) => (m.nu() > 1.0).then(|| m.mu().to_vec()),
        }
    }

    /// `log f_X(x)`; `-inf` outside the support.
    pub fn joint_logdensity(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(self.joint_logdensity_unchecked(x))
    }

    fn joint_logdensity_unchecked(&self, x: &[f64]) -> f64 {
        match &self.kind {
            ModelKind::Elliptical(m) => m.ln_density_unchecked(x),
            ModelKind::CopulaJoint { marginals, copula } => {
                let d = marginals.len();
                let mut u = Vec::with_capacity(d);
                let mut ubar = Vec::with_capacity(d);
                let mut ln_marg = 0.0;
                for (m, xj) in marginals.iter().zip(x) {
                    let lp = m.ln_pdf(*xj);
                    if lp == f64::NEG_INFINITY || lp.is_nan() {
                        return f64::NEG_INFINITY;
                    }
                    ln_marg += lp;
                    let (p, q) = m.cdf_pair(*xj);
                    u.push(p);
                    ubar.push(q);
                }
                let lc = copula.ln_density_pairs(&u, &ubar);
                if lc.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    lc + ln_marg
                }
            }
        }
    }

    /// Unnormalized log density of `X' | S = v` at the reduced point `x'`
    /// (length `d - 1`): `log f_X(x', v - 1'x')`. The `log f_S(v)` offset is
    /// omitted since it cancels in every Metropolis-Hastings ratio.
    ///
    /// Pure-loss models return `-inf` outside the open v-simplex.
    pub fn conditional_target_logdensity(&self, x_reduced: &[f64], v: f64) -> f64 {
        let d = self.dim();
        debug_assert_eq!(x_reduced.len() + 1, d);
        let last = v - x_reduced.iter().sum::<f64>();
        if self.support == SupportKind::PureLoss
            && (!(last > 0.0) || x_reduced.iter().any(|xj| !(*xj > 0.0)))
        {
            return f64::NEG_INFINITY;
        }
        let mut full = Vec::with_capacity(d);
        full.extend_from_slice(x_reduced);
        full.push(last);
        let value = self.joint_logdensity_unchecked(&full);
        if value.is_nan() {
            f64::NEG_INFINITY
        } else {
            value
        }
    }

    /// `n` i.i.d. loss vectors and their sums.
    pub fn sample_portfolio<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> SampleBatch {
        let d = self.dim();
        let x = match &self.kind {
            ModelKind::Elliptical(m) => m.sample(n, rng).into_iter().flatten().collect(),
            ModelKind::CopulaJoint { marginals, copula } => {
                let (u, ubar) = copula.sample_pairs(n, rng);
                u.iter()
                    .zip(&ubar)
                    .enumerate()
                    .map(|(k, (p, q))| marginals[k % d].quantile_pair(*p, *q))
                    .collect()
            }
        };
        SampleBatch::new(d, x).expect("rows have model dimension")
    }
}

/// Law of `X' | S = v` for a multivariate-t loss vector: a `(d-1)`-variate
/// Pearson type VII with density proportional to
/// `(1 + (x - w)' V (x - w) / (nu + D))^(-(nu + d) / 2)`.
#[derive(Debug, Clone)]
pub struct PearsonVII {
    location: Vec<f64>,
    scale_inverse: DMatrix<f64>,
    shift: f64,
    nu: f64,
    dim: usize,
}

impl PearsonVII {
    pub fn location(&self) -> &[f64] {
        &self.location
    }

    pub fn scale_inverse(&self) -> &DMatrix<f64> {
        &self.scale_inverse
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Dimension of the original (unconditioned) vector.
    pub fn original_dim(&self) -> usize {
        self.dim
    }

    pub fn is_valid(&self) -> bool {
        self.nu + self.shift > 0.0
    }

    /// The same law written as a `(d-1)`-variate Student-t: `nu + 1` degrees of
    /// freedom, location `w`, scale `(nu + D) / (nu + 1) V^{-1}`.
    pub fn as_mvt(&self) -> Result<MvtSpec> {
        if !self.is_valid() {
            return Err(Error::InvalidParameter(format!(
                "Pearson VII requires nu + D > 0, got {}",
                self.nu + self.shift
            )));
        }
        let dof = self.nu + 1.0;
        let v_inv = SpdMatrix::new(self.scale_inverse.clone())?.inverse();
        let scale = SpdMatrix::new(v_inv * ((self.nu + self.shift) / dof))?;
        MvtSpec::new(dof, self.location.clone(), scale)
    }

    /// Normalized log density at `x'`.
    pub fn ln_density(&self, x_reduced: &[f64]) -> Result<f64> {
        self.as_mvt()?.ln_density(x_reduced)
    }

    /// Conditional covariance of `X' | S = v` (finite for `nu > 1`).
    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        if self.nu <= 1.0 {
            return Err(Error::InvalidParameter("covariance needs nu > 1".into()));
        }
        let v_inv = SpdMatrix::new(self.scale_inverse.clone())?.inverse();
        Ok(v_inv * ((self.nu + self.shift) / (self.nu - 1.0)))
    }
}

/// Parameters `(w, V, D)` of `X' | S = v` for `X ~ t_nu(mu, Sigma)`.
///
/// A nonzero location is handled by conditioning the centered vector on
/// `S = v - 1'mu` and translating the result.
pub fn pearson_vii_params(mvt: &MvtSpec, v: f64) -> Result<PearsonVII> {
    let d = mvt.dim();
    let dr = d - 1;
    let a = mvt.scale().inverse();
    let a1 = a.view((0, 0), (dr, dr)).into_owned();
    let a2 = a.view((0, dr), (dr, 1)).into_owned();
    let a3 = a[(dr, dr)];
    let ones = DVector::from_element(dr, 1.0);

    let v_mat = &a1 - &a2 * ones.transpose() - &ones * a2.transpose() + (&ones * ones.transpose()) * a3;
    let v_mat = (&v_mat + v_mat.transpose()) * 0.5;
    let v_spd = SpdMatrix::new(v_mat.clone())
        .map_err(|e| Error::Singular(format!("conditional scale matrix V: {e}")))?;

    let centered_v = v - mvt.mu().iter().sum::<f64>();
    let rhs = (&ones * a3 - a2.column(0)) * centered_v;
    let w0 = v_spd.solve(&rhs);
    let shift = centered_v * centered_v * a3 - (w0.transpose() * &v_mat * &w0)[(0, 0)];
    let location = w0.iter().zip(mvt.mu()).map(|(w, m)| w + m).collect();
    Ok(PearsonVII { location, scale_inverse: v_mat, shift, nu: mvt.nu(), dim: d })
}

/// `(v/d, ..., v/d)`: the allocation of an exchangeable model.
pub fn exchangeable_true_ac(v: f64, d: usize) -> Vec<f64> {
    vec![v / d as f64; d]
}

/// `E[X] + Sigma 1 / (1' Sigma 1) (v - 1'mu)`: VaR contributions of an
/// elliptical model with finite covariance.
pub fn elliptical_true_ac(mvt: &MvtSpec, v: f64) -> Result<Vec<f64>> {
    if mvt.nu() <= 2.0 {
        return Err(Error::InvalidParameter(format!(
            "elliptical allocation needs finite covariance (nu > 2), got nu = {}",
            mvt.nu()
        )));
    }
    let sigma = mvt.scale().matrix();
    let row_sums: Vec<f64> = sigma.row_iter().map(|r| r.sum()).collect();
    let total: f64 = row_sums.iter().sum();
    let excess = v - mvt.mu().iter().sum::<f64>();
    Ok(mvt
        .mu()
        .iter()
        .zip(&row_sums)
        .map(|(m, r)| m + r / total * excess)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    pub satisfied: bool,
    pub detail: String,
}

/// Verdicts on the sufficient conditions for a root-N central limit theorem
/// of the chain average. Conditions on the proposal are checked separately
/// in [`crate::mcmc::minorization_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltValidationReport {
    pub conditions: Vec<ConditionCheck>,
}

impl CltValidationReport {
    pub fn all_satisfied(&self) -> bool {
        self.conditions.iter().all(|c| c.satisfied)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Upper limit on the rotated-Clayton `theta` under which the copula density
/// stays positive and bounded on the conditional support.
pub fn clayton_theta_bound(p: f64, d: usize) -> f64 {
    (1.0 - p).ln() / (1.0 - 1.0 / d as f64).ln()
}

const DENSITY_SCAN_POINTS: usize = 2001;

pub fn validate_clt_conditions(model: &RiskModel, p: f64, v: f64) -> CltValidationReport {
    let mut conditions = Vec::new();
    match model.kind() {
        ModelKind::CopulaJoint { marginals, copula } => {
            let pure = model.support() == SupportKind::PureLoss;
            conditions.push(ConditionCheck {
                name: "pure_loss_support".into(),
                satisfied: pure,
                detail: if pure {
                    "all marginals supported on [0, inf); the conditional law lives on the bounded v-simplex".into()
                } else {
                    "profit-and-loss marginals: the conditional support is unbounded and the \
                     bounded-simplex CLT argument does not apply"
                        .into()
                },
            });

            // (C2) marginal densities positive and bounded on [0, v]
            let upper = v.max(0.0);
            let mut c2 = true;
            let mut worst = String::new();
            'scan: for (j, m) in marginals.iter().enumerate() {
                for k in 0..DENSITY_SCAN_POINTS {
                    let x = upper * k as f64 / (DENSITY_SCAN_POINTS - 1) as f64;
                    let f = m.pdf(x);
                    if !(f > 0.0 && f.is_finite()) {
                        c2 = false;
                        worst = format!("f_{} = {f} at x = {x}", j + 1);
                        break 'scan;
                    }
                }
            }
            conditions.push(ConditionCheck {
                name: "C2".into(),
                satisfied: c2,
                detail: if c2 {
                    format!("marginal densities positive and finite on a {DENSITY_SCAN_POINTS}-point grid of [0, {v}]")
                } else {
                    worst
                },
            });

            // (C3) copula density positive and bounded on F_1([0,v]) x ... x F_d([0,v])
            let c3 = match copula {
                CopulaSpec::RotatedClayton(c) => {
                    let bound = clayton_theta_bound(p, marginals.len());
                    ConditionCheck {
                        name: "C3".into(),
                        satisfied: c.theta() < bound,
                        detail: format!(
                            "rotated Clayton: theta = {} against log(1-p)/log(1-1/d) = {bound:.3}",
                            c.theta()
                        ),
                    }
                }
                CopulaSpec::T(_) => {
                    let at_zero: Vec<f64> = marginals.iter().map(|m| m.cdf(0.0)).collect();
                    let ok = at_zero.iter().all(|f| *f > 0.0);
                    ConditionCheck {
                        name: "C3".into(),
                        satisfied: ok,
                        detail: format!("t copula requires F_j(0) > 0 for all j; F_j(0) = {at_zero:?}"),
                    }
                }
            };
            conditions.push(c3);
        }
        ModelKind::Elliptical(mvt) => {
            let nu = mvt.nu();
            conditions.push(ConditionCheck {
                name: "finite_second_moment".into(),
                satisfied: nu > 2.0,
                detail: format!("multivariate t requires nu > 2, nu = {nu}"),
            });
            let check = match pearson_vii_params(mvt, v) {
                Ok(pv) => ConditionCheck {
                    name: "mpcn_elliptical_validity".into(),
                    satisfied: pv.is_valid(),
                    detail: format!("nu + D = {:.3} must be positive", nu + pv.shift()),
                },
                Err(e) => ConditionCheck {
                    name: "mpcn_elliptical_validity".into(),
                    satisfied: false,
                    detail: e.to_string(),
                },
            };
            conditions.push(check);
        }
    }
    CltValidationReport { conditions }
}
