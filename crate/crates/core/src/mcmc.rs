//! Metropolis-Hastings on the conditional law of `X' | S = v`, the MCMC
//! allocation estimator and its output diagnostics.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::Serialize;

use crate::distributions::DirichletSpec;
use crate::error::{Error, Result};
use crate::estimators::{AllocationEstimate, EstimateMeta, Method};
use crate::linalg::SpdMatrix;
use crate::risk_models::{ConditionCheck, RiskModel, SupportKind};
use crate::rng::{stream_rng, CHAIN_STREAM};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone)]
pub struct RandomWalk {
    cov: SpdMatrix,
}

impl RandomWalk {
    pub fn cov(&self) -> &SpdMatrix {
        &self.cov
    }
}

#[derive(Debug, Clone)]
pub struct IndependentDirichlet {
    dirichlet: DirichletSpec,
}

impl IndependentDirichlet {
    pub fn alpha(&self) -> &[f64] {
        self.dirichlet.alpha()
    }

    pub fn v(&self) -> f64 {
        self.dirichlet.scale()
    }
}

#[derive(Debug, Clone)]
pub struct Mpcn {
    rho: f64,
    mu: Vec<f64>,
    cov: SpdMatrix,
    unit_gamma: Gamma<f64>,
}

impl Mpcn {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn cov(&self) -> &SpdMatrix {
        &self.cov
    }

    /// `|Sigma^{-1/2} (x - mu)|`.
    pub fn radius(&self, x: &[f64]) -> f64 {
        let c: Vec<f64> = x.iter().zip(&self.mu).map(|(a, m)| a - m).collect();
        self.cov.mahalanobis_sq(&c).sqrt()
    }
}

/// Proposal kernel on the reduced `(d-1)`-dimensional state space.
#[derive(Debug, Clone)]
pub enum ProposalSpec {
    RandomWalkGauss(RandomWalk),
    IndependentDirichlet(IndependentDirichlet),
    MpCN(Mpcn),
}

impl ProposalSpec {
    pub fn random_walk(cov: SpdMatrix) -> Self {
        Self::RandomWalkGauss(RandomWalk { cov })
    }

    /// Independent proposal from `v * Dirichlet(alpha)`; `alpha` has the full
    /// portfolio length `d`.
    pub fn independent_dirichlet(alpha: Vec<f64>, v: f64) -> Result<Self> {
        Ok(Self::IndependentDirichlet(IndependentDirichlet { dirichlet: DirichletSpec::new(alpha, v)? }))
    }

    pub fn mpcn(rho: f64, mu: Vec<f64>, cov: SpdMatrix) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidParameter(format!("MpCN rho must lie in (0, 1), got {rho}")));
        }
        if mu.len() != cov.dim() {
            return Err(Error::DimensionMismatch { expected: cov.dim(), got: mu.len() });
        }
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParameter("MpCN center must be finite".into()));
        }
        let unit_gamma = Gamma::new(0.5 * mu.len() as f64, 1.0)
            .map_err(|e| Error::InvalidParameter(format!("MpCN gamma: {e}")))?;
        Ok(Self::MpCN(Mpcn { rho, mu, cov, unit_gamma }))
    }

    /// Dimension of the chain state.
    pub fn dim(&self) -> usize {
        match self {
            Self::RandomWalkGauss(p) => p.cov.dim(),
            Self::IndependentDirichlet(p) => p.dirichlet.dim() - 1,
            Self::MpCN(p) => p.mu.len(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::RandomWalkGauss(_) => "random_walk",
            Self::IndependentDirichlet(_) => "dirichlet",
            Self::MpCN(_) => "mpcn",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub candidate: Vec<f64>,
    /// `log q(x, y)`; absent for MpCN, whose acceptance ratio has its own form.
    pub log_q_forward: Option<f64>,
    /// `log q(y, x)`.
    pub log_q_backward: Option<f64>,
}

pub fn propose<R: Rng + ?Sized>(spec: &ProposalSpec, x: &[f64], rng: &mut R) -> Candidate {
    match spec {
        ProposalSpec::RandomWalkGauss(p) => {
            let z: Vec<f64> = (0..x.len()).map(|_| StandardNormal.sample(rng)).collect();
            let step = p.cov.color(&z);
            let log_q = -0.5 * (z.iter().map(|v| v * v).sum::<f64>() + p.cov.log_det() + x.len() as f64 * LN_2PI);
            Candidate {
                candidate: x.iter().zip(&step).map(|(a, b)| a + b).collect(),
                log_q_forward: Some(log_q),
                log_q_backward: Some(log_q),
            }
        }
        ProposalSpec::IndependentDirichlet(p) => {
            let mut y = p.dirichlet.sample(rng);
            y.pop();
            let fwd = p.dirichlet.ln_density(&y).expect("reduced dimension");
            let bwd = p.dirichlet.ln_density(x).expect("reduced dimension");
            Candidate { candidate: y, log_q_forward: Some(fwd), log_q_backward: Some(bwd) }
        }
        ProposalSpec::MpCN(p) => {
            let r = p.radius(x);
            let rate = (0.5 * r * r).max(f64::MIN_POSITIVE);
            let g: f64 = p.unit_gamma.sample(rng);
            let z = g / rate;
            let normal: Vec<f64> = (0..x.len()).map(|_| StandardNormal.sample(rng)).collect();
            let w = p.cov.color(&normal);
            let (a, b) = (p.rho.sqrt(), ((1.0 - p.rho) / z).sqrt());
            let candidate = x
                .iter()
                .zip(&p.mu)
                .zip(&w)
                .map(|((xi, mi), wi)| mi + a * (xi - mi) + b * wi)
                .collect();
            Candidate { candidate, log_q_forward: None, log_q_backward: None }
        }
    }
}

/// Current chain position with its cached target log density.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub x: Vec<f64>,
    pub ln_target: f64,
}

impl ChainState {
    pub fn new<F: Fn(&[f64]) -> f64>(target: &F, x: Vec<f64>) -> Self {
        let ln_target = target(&x);
        Self { x, ln_target }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub next: ChainState,
    pub accepted: bool,
    pub alpha: f64,
}

/// Log acceptance ratio before truncation at zero; `-inf` rejects outright.
pub fn log_acceptance<F: Fn(&[f64]) -> f64>(
    target: &F,
    spec: &ProposalSpec,
    state: &ChainState,
    cand: &Candidate,
) -> (f64, f64) {
    let ln_y = target(&cand.candidate);
    if ln_y == f64::NEG_INFINITY || ln_y.is_nan() {
        return (f64::NEG_INFINITY, ln_y);
    }
    let mut la = ln_y - state.ln_target;
    match spec {
        ProposalSpec::MpCN(p) => {
            let d = state.x.len() as f64;
            la += d * (p.radius(&cand.candidate).ln() - p.radius(&state.x).ln());
        }
        _ => {
            la += cand.log_q_backward.unwrap_or(0.0) - cand.log_q_forward.unwrap_or(0.0);
        }
    }
    if la.is_nan() {
        la = f64::NEG_INFINITY;
    }
    (la, ln_y)
}

/// One Metropolis-Hastings transition from `state`.
pub fn mh_step<F, R>(target: &F, spec: &ProposalSpec, state: &ChainState, rng: &mut R) -> Step
where
    F: Fn(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    let cand = propose(spec, &state.x, rng);
    let (la, ln_y) = log_acceptance(target, spec, state, &cand);
    let alpha = if la >= 0.0 { 1.0 } else { la.exp() };
    let u: f64 = rng.random();
    if alpha > 0.0 && u <= alpha {
        Step { next: ChainState { x: cand.candidate, ln_target: ln_y }, accepted: true, alpha }
    } else {
        Step { next: state.clone(), accepted: false, alpha }
    }
}

/// Raw output of a Metropolis-Hastings run on an arbitrary target.
#[derive(Debug, Clone, PartialEq)]
pub struct MhPath {
    pub dim: usize,
    /// `n x dim`, row-major, including repeats after rejections.
    pub path: Vec<f64>,
    pub accepted: usize,
}

pub fn run_mh<F, R>(target: &F, spec: &ProposalSpec, n: usize, init: Vec<f64>, rng: &mut R) -> Result<MhPath>
where
    F: Fn(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    if n < 1 {
        return Err(Error::InvalidParameter("chain length must be at least 1".into()));
    }
    if init.len() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), got: init.len() });
    }
    let dim = init.len();
    let mut state = ChainState::new(target, init);
    if !state.ln_target.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "initial state {:?} has zero target density",
            state.x
        )));
    }
    let mut path = Vec::with_capacity(n * dim);
    path.extend_from_slice(&state.x);
    let mut accepted = 0;
    for _ in 1..n {
        let step = mh_step(target, spec, &state, rng);
        accepted += step.accepted as usize;
        state = step.next;
        path.extend_from_slice(&state.x);
    }
    Ok(MhPath { dim, path, accepted })
}

/// A completed chain on `X' | S = v`.
#[derive(Debug, Clone)]
pub struct ChainRun {
    path: Vec<f64>,
    dim: usize,
    accepted: usize,
    init: Vec<f64>,
    proposal: ProposalSpec,
    model: RiskModel,
    v: f64,
}

impl ChainRun {
    pub fn len(&self) -> usize {
        self.path.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }

    /// Dimension of the reduced state.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn path(&self) -> &[f64] {
        &self.path
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.path[i * self.dim..(i + 1) * self.dim]
    }

    pub fn accepted(&self) -> usize {
        self.accepted
    }

    pub fn init(&self) -> &[f64] {
        &self.init
    }

    pub fn proposal(&self) -> &ProposalSpec {
        &self.proposal
    }

    pub fn model(&self) -> &RiskModel {
        &self.model
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    /// State `i` completed to `(x', v - 1'x')`.
    pub fn lifted(&self, i: usize) -> Vec<f64> {
        let mut x = self.state(i).to_vec();
        x.push(self.v - x.iter().sum::<f64>());
        x
    }

    /// Whole path lifted to `n x d`, row-major.
    pub fn lifted_path(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() * (self.dim + 1));
        for row in self.path.chunks_exact(self.dim) {
            out.extend_from_slice(row);
            out.push(self.v - row.iter().sum::<f64>());
        }
        out
    }

    /// Component `j` of the lifted path.
    pub fn component(&self, j: usize) -> Vec<f64> {
        self.path
            .chunks_exact(self.dim)
            .map(|row| if j < self.dim { row[j] } else { self.v - row.iter().sum::<f64>() })
            .collect()
    }
}

/// Default starting point: the first `d - 1` coordinates of `(v/d) 1`.
pub fn default_init(d: usize, v: f64) -> Vec<f64> {
    vec![v / d as f64; d - 1]
}

pub fn run_chain(
    model: &RiskModel,
    v: f64,
    spec: &ProposalSpec,
    n: usize,
    init: Option<Vec<f64>>,
    seed: u64,
) -> Result<ChainRun> {
    let d = model.dim();
    if spec.dim() != d - 1 {
        return Err(Error::DimensionMismatch { expected: d - 1, got: spec.dim() });
    }
    if !v.is_finite() {
        return Err(Error::InvalidParameter(format!("conditioning level must be finite, got {v}")));
    }
    let init = init.unwrap_or_else(|| default_init(d, v));
    let target = |x: &[f64]| model.conditional_target_logdensity(x, v);
    let mut rng = stream_rng(seed, CHAIN_STREAM);
    let raw = run_mh(&target, spec, n, init.clone(), &mut rng)?;
    Ok(ChainRun {
        path: raw.path,
        dim: raw.dim,
        accepted: raw.accepted,
        init,
        proposal: spec.clone(),
        model: model.clone(),
        v,
    })
}

pub fn acceptance_rate(run: &ChainRun) -> Result<f64> {
    let n = run.len();
    if n < 2 {
        return Err(Error::InvalidParameter("acceptance rate needs at least two states".into()));
    }
    Ok(run.accepted() as f64 / (n - 1) as f64)
}

/// Path average of the lifted chain; the last component is closed by the
/// full-allocation identity so that the estimate sums to `v`.
pub fn mcmc_allocation(run: &ChainRun) -> AllocationEstimate {
    let n = run.len();
    let k = run.dim();
    let mut sums = vec![0.0; k];
    for row in run.path().chunks_exact(k) {
        for (a, x) in sums.iter_mut().zip(row) {
            *a += x;
        }
    }
    let mut ac: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
    ac.push(run.v() - ac.iter().sum::<f64>());

    let clt = batch_means(&run.lifted_path(), k + 1, None, None).ok();
    let stderr = clt
        .as_ref()
        .map(|c| c.sigma_hat.iter().map(|s| s / (n as f64).sqrt()).collect());
    AllocationEstimate {
        method: Method::Mcmc,
        ac,
        stderr,
        meta: EstimateMeta::Mcmc { n, acceptance_rate: acceptance_rate(run).ok(), clt },
    }
}

/// Batch-means estimate of the asymptotic covariance of a path average.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub n: usize,
    pub batch_len: usize,
    pub n_batches: usize,
    pub estimate: Vec<f64>,
    pub sigma_hat: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
}

pub const Z_95: f64 = 1.96;

/// Batch means over an `n x k` row-major series. Defaults follow
/// `L = floor(sqrt(n))`, `B = floor(n / L)`.
pub fn batch_means(values: &[f64], k: usize, l: Option<usize>, b: Option<usize>) -> Result<CltReport> {
    if k == 0 || values.len() % k != 0 {
        return Err(Error::InvalidParameter("series does not split into rows".into()));
    }
    let n = values.len() / k;
    let (l, b) = match (l, b) {
        (Some(l), Some(b)) => (l, b),
        (Some(l), None) => (l, if l == 0 { 0 } else { n / l }),
        (None, Some(b)) => (if b == 0 { 0 } else { n / b }, b),
        (None, None) => {
            let l = ((n as f64).sqrt().floor() as usize).max(1);
            (l, n / l)
        }
    };
    if l < 1 {
        return Err(Error::InvalidParameter("batch length must be at least 1".into()));
    }
    if b < 2 {
        return Err(Error::InvalidParameter(format!("batch means needs at least 2 batches, got {b}")));
    }
    if l * b > n {
        return Err(Error::InvalidParameter(format!("{b} batches of length {l} exceed the {n} samples")));
    }
    let estimate = crate::stats::column_means(values, k);
    let batch: Vec<Vec<f64>> = (0..b)
        .map(|i| crate::stats::column_means(&values[i * l * k..(i + 1) * l * k], k))
        .collect();
    let grand: Vec<f64> = (0..k).map(|j| batch.iter().map(|m| m[j]).sum::<f64>() / b as f64).collect();
    let sigma_hat: Vec<f64> = (0..k)
        .map(|j| {
            let ss: f64 = batch.iter().map(|m| (m[j] - grand[j]).powi(2)).sum();
            (l as f64 / (b as f64 - 1.0) * ss).sqrt()
        })
        .collect();
    let half: Vec<f64> = sigma_hat.iter().map(|s| Z_95 * s / (n as f64).sqrt()).collect();
    Ok(CltReport {
        n,
        batch_len: l,
        n_batches: b,
        ci_low: estimate.iter().zip(&half).map(|(e, h)| e - h).collect(),
        ci_high: estimate.iter().zip(&half).map(|(e, h)| e + h).collect(),
        estimate,
        sigma_hat,
    })
}

/// Sample autocorrelations `r(0..=max_lag)` using `1/(n-k)` autocovariances.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if max_lag >= n {
        return Err(Error::InvalidParameter(format!("max lag {max_lag} must be below the series length {n}")));
    }
    let m = crate::stats::mean(series);
    let c: Vec<f64> = series.iter().map(|x| x - m).collect();
    let r0 = c.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if !(r0 > 0.0) {
        return Err(Error::Domain("autocorrelation of a constant series".into()));
    }
    Ok((0..=max_lag)
        .map(|k| {
            let rk = c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / (n - k) as f64;
            (rk / r0).clamp(-1.0, 1.0)
        })
        .collect())
}

/// Whether the proposal density is bounded below on the conditional support
/// (minorization condition on the proposal).
pub fn minorization_check(spec: &ProposalSpec, support: SupportKind) -> ConditionCheck {
    let (satisfied, detail) = match spec {
        ProposalSpec::RandomWalkGauss(_) => (
            true,
            "Gaussian random-walk density is positive and continuous on the bounded support".to_string(),
        ),
        ProposalSpec::IndependentDirichlet(p) => {
            let ok = p.alpha().iter().all(|a| *a <= 1.0);
            (
                ok,
                format!(
                    "Dirichlet proposal bounded below on the simplex iff all alpha <= 1; alpha = {:?}",
                    p.alpha()
                ),
            )
        }
        ProposalSpec::MpCN(_) => (
            true,
            "MpCN proposal density is positive everywhere".to_string(),
        ),
    };
    let detail = if support == SupportKind::ProfitAndLoss && !matches!(spec, ProposalSpec::MpCN(_)) {
        format!("{detail}; note the conditional support is unbounded")
    } else {
        detail
    };
    ConditionCheck { name: "C1".into(), satisfied, detail }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rw2() -> ProposalSpec {
        ProposalSpec::random_walk(SpdMatrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 0.5]]).unwrap())
    }

    #[test]
    fn random_walk_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let c = propose(&rw2(), &[0.3, 0.1], &mut rng);
            assert_eq!(c.log_q_forward, c.log_q_backward);
        }
    }

    #[test]
    fn dirichlet_candidates_on_simplex() {
        let spec = ProposalSpec::independent_dirichlet(vec![0.2, 0.28, 0.6], 25.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let c = propose(&spec, &[8.0, 8.0], &mut rng);
            let last = 25.0 - c.candidate.iter().sum::<f64>();
            assert!(c.candidate.iter().all(|x| *x >= 0.0) && last >= -1e-12);
        }
    }

    #[test]
    fn mpcn_jump_shrinks_as_rho_tends_to_one() {
        let x = [1.5, -0.5];
        let mut prev = f64::INFINITY;
        for rho in [0.5, 0.9, 0.99, 0.9999] {
            let spec = ProposalSpec::mpcn(rho, vec![0.0, 0.0], SpdMatrix::identity(2)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let msj: f64 = (0..1000)
                .map(|_| {
                    let c = propose(&spec, &x, &mut rng).candidate;
                    (c[0] - x[0]).powi(2) + (c[1] - x[1]).powi(2)
                })
                .sum::<f64>()
                / 1000.0;
            assert!(msj < prev);
            prev = msj;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn identical_candidate_accepts_with_probability_one() {
        let target = |x: &[f64]| -0.5 * x.iter().map(|v| v * v).sum::<f64>();
        let state = ChainState::new(&target, vec![0.4, -1.1]);
        let same = Candidate { candidate: state.x.clone(), log_q_forward: None, log_q_backward: None };
        let spec = ProposalSpec::mpcn(0.8, vec![0.1, 0.2], SpdMatrix::identity(2)).unwrap();
        assert_eq!(log_acceptance(&target, &spec, &state, &same).0, 0.0);
        let same = Candidate { candidate: state.x.clone(), log_q_forward: Some(-1.0), log_q_backward: Some(-1.0) };
        assert_eq!(log_acceptance(&target, &rw2(), &state, &same).0, 0.0);
    }

    #[test]
    fn zero_density_candidate_rejected() {
        let target = |x: &[f64]| if x.iter().all(|v| *v > 0.0) { 0.0 } else { f64::NEG_INFINITY };
        let state = ChainState::new(&target, vec![0.01, 0.01]);
        let huge = ProposalSpec::random_walk(SpdMatrix::from_rows(&[vec![1e6, 0.0], vec![0.0, 1e6]]).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut rejected = 0;
        for _ in 0..100 {
            let step = mh_step(&target, &huge, &state, &mut rng);
            if !step.accepted {
                rejected += 1;
                assert_eq!(step.next, state);
            } else {
                assert_eq!(step.alpha, 1.0);
            }
        }
        assert!(rejected > 50);
    }

    #[test]
    fn uniform_interior_moves_always_accepted() {
        let target = |x: &[f64]| if x.iter().all(|v| v.abs() < 100.0) { 0.0 } else { f64::NEG_INFINITY };
        let small = ProposalSpec::random_walk(SpdMatrix::from_rows(&[vec![0.01, 0.0], vec![0.0, 0.01]]).unwrap());
        let raw = run_mh(&target, &small, 1000, vec![0.0, 0.0], &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(raw.accepted, 999);
    }

    #[test]
    fn batch_means_examples() {
        let r = batch_means(&vec![2.0; 100], 1, None, None).unwrap();
        assert_eq!(r.sigma_hat, vec![0.0]);
        assert_eq!(r.ci_low, r.ci_high);
        assert_eq!((r.batch_len, r.n_batches), (10, 10));
        assert!(batch_means(&[1.0], 1, None, None).is_err());
        assert!(batch_means(&[1.0, 2.0, 3.0], 1, Some(2), None).is_err());
        assert!(batch_means(&[1.0; 10], 1, Some(5), Some(3)).is_err());
        let big = batch_means(&vec![0.0; 1_000_000], 1, None, None).unwrap();
        assert_eq!((big.batch_len, big.n_batches), (1000, 1000));
    }

    #[test]
    fn acf_examples() {
        let s: Vec<f64> = (0..50).map(|i| (i as f64 * 0.7).sin()).collect();
        assert_eq!(acf(&s, 5).unwrap()[0], 1.0);
        assert!(acf(&[3.0; 10], 2).is_err());
        assert!(acf(&s, 50).is_err());
    }

    #[test]
    fn minorization_verdicts() {
        let good = ProposalSpec::independent_dirichlet(vec![0.2, 0.28, 0.6], 25.0).unwrap();
        assert!(minorization_check(&good, SupportKind::PureLoss).satisfied);
        let bad = ProposalSpec::independent_dirichlet(vec![2.0, 1.0, 1.0], 25.0).unwrap();
        assert!(!minorization_check(&bad, SupportKind::PureLoss).satisfied);
        assert!(minorization_check(&rw2(), SupportKind::PureLoss).satisfied);
    }

    #[test]
    fn single_state_chain() {
        let target = |_: &[f64]| 0.0;
        let raw = run_mh(&target, &rw2(), 1, vec![1.0, 2.0], &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(raw.path, vec![1.0, 2.0]);
        assert_eq!(raw.accepted, 0);
        assert_relative_eq!(raw.path.iter().sum::<f64>(), 3.0);
    }
}
