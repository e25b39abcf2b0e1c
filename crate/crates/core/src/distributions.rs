//! Marginal, copula, multivariate-t and Dirichlet densities and samplers.
//!
//! Every density is evaluated in log space. Wherever a probability close to
//! one matters (upper tails of heavy-tailed marginals, the rotated Clayton
//! copula), values travel as `(u, 1 - u)` pairs so the small side keeps its
//! relative precision.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::SpdMatrix;
use crate::special::{beta_inc_pair_with, ln_beta, ln_gamma, normal_quantile};

/// Standard Student-t with `nu` degrees of freedom, constants cached.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardT {
    nu: f64,
    ln_norm: f64,
    ln_beta: f64,
}

impl StandardT {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("degrees of freedom must be > 0, got {nu}")));
        }
        Ok(Self {
            nu,
            ln_norm: ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln(),
            ln_beta: ln_beta(0.5 * nu, 0.5),
        })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.ln_norm - 0.5 * (self.nu + 1.0) * (x * x / self.nu).ln_1p()
    }

    /// `(P(T <= x), P(T > x))`.
    pub fn cdf_pair(&self, x: f64) -> (f64, f64) {
        if x.is_nan() {
            return (f64::NAN, f64::NAN);
        }
        if x.is_infinite() {
            return if x > 0.0 { (1.0, 0.0) } else { (0.0, 1.0) };
        }
        let nu = self.nu;
        let x2 = x * x;
        if x2 < nu {
            // central mass I_{x^2/(nu+x^2)}(1/2, nu/2) is the accurate side
            let denom = nu + x2;
            let (central, _) = beta_inc_pair_with(0.5, 0.5 * nu, x2 / denom, nu / denom, self.ln_beta);
            let half = 0.5 * central;
            if x >= 0.0 {
                (0.5 + half, 0.5 - half)
            } else {
                (0.5 - half, 0.5 + half)
            }
        } else {
            let r = nu / x2;
            let (tail2, rest) = beta_inc_pair_with(0.5 * nu, 0.5, r / (1.0 + r), 1.0 / (1.0 + r), self.ln_beta);
            let tail = 0.5 * tail2;
            let body = 0.5 + 0.5 * rest;
            if x > 0.0 {
                (body, tail)
            } else {
                (tail, body)
            }
        }
    }

    /// Inverse of [`cdf_pair`](Self::cdf_pair) given both `p` and `q = 1 - p`.
    pub fn quantile_pair(&self, p: f64, q: f64) -> f64 {
        if p == q {
            0.0
        } else if p < q {
            -self.upper_quantile(p)
        } else {
            self.upper_quantile(q)
        }
    }

    /// `x >= 0` with `P(T > x) = tail`, for `tail` in `(0, 1/2]`.
    ///
    /// Log-space Newton iteration kept inside a shrinking bisection bracket.
    fn upper_quantile(&self, tail: f64) -> f64 {
        if tail >= 0.5 {
            return 0.0;
        }
        if tail <= 0.0 {
            return f64::INFINITY;
        }
        let nu = self.nu;
        let ln_tail = tail.ln();

        // The power-law tail approximation overshoots the true quantile.
        let mut hi = ((self.ln_norm + 0.5 * (nu - 1.0) * nu.ln() - ln_tail) / nu).exp();
        if !hi.is_finite() {
            hi = f64::MAX;
        }
        while self.cdf_pair(hi).1 > tail && hi < f64::MAX {
            hi = (hi * 2.0).min(f64::MAX);
        }
        let mut lo = 0.0;

        let z = -normal_quantile(tail);
        let cornish_fisher = z
            + (z.powi(3) + z) / (4.0 * nu)
            + (5.0 * z.powi(5) + 16.0 * z.powi(3) + 3.0 * z) / (96.0 * nu * nu);
        let mut x = if cornish_fisher.is_finite() && cornish_fisher > lo && cornish_fisher < hi {
            cornish_fisher
        } else {
            0.5 * (lo + hi)
        };

        for _ in 0..200 {
            let (_, sf) = self.cdf_pair(x);
            let h = sf.ln() - ln_tail;
            if h > 0.0 {
                lo = x;
            } else if h < 0.0 {
                hi = x;
            } else {
                return x;
            }
            let density = self.ln_pdf(x).exp();
            let mut next = x + h * sf / density;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-15 * x.abs() || hi - lo <= 1e-15 * hi {
                return next;
            }
            x = next;
        }
        x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pareto {
    kappa: f64,
    gamma: f64,
}

impl Pareto {
    pub fn new(kappa: f64, gamma: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite() && gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Pareto requires kappa > 0 and gamma > 0, got kappa={kappa}, gamma={gamma}"
            )));
        }
        Ok(Self { kappa, gamma })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    // ln (gamma / (x + gamma))
    fn ln_ratio(&self, x: f64) -> f64 {
        -(x / self.gamma).ln_1p()
    }
}

/// Student-t marginal with location and scale.
#[derive(Debug, Clone, PartialEq)]
pub struct StudentT {
    std: StandardT,
    mu: f64,
    sigma: f64,
}

impl StudentT {
    pub fn new(nu: f64, mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Student-t requires finite mu and sigma > 0, got mu={mu}, sigma={sigma}"
            )));
        }
        Ok(Self { std: StandardT::new(nu)?, mu, sigma })
    }

    pub fn nu(&self) -> f64 {
        self.std.nu
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Univariate loss marginal.
#[derive(Debug, Clone, PartialEq)]
pub enum MarginalSpec {
    /// Density `kappa gamma^kappa / (x + gamma)^(kappa + 1)` on `x >= 0`.
    Pareto(Pareto),
    StudentT(StudentT),
}

impl MarginalSpec {
    pub fn pareto(kappa: f64, gamma: f64) -> Result<Self> {
        Pareto::new(kappa, gamma).map(Self::Pareto)
    }

    pub fn student_t(nu: f64, mu: f64, sigma: f64) -> Result<Self> {
        StudentT::new(nu, mu, sigma).map(Self::StudentT)
    }

    /// Whether the support is the nonnegative half-line.
    pub fn is_nonnegative(&self) -> bool {
        matches!(self, Self::Pareto(_))
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match self {
            Self::Pareto(p) => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (p.kappa / p.gamma).ln() + (p.kappa + 1.0) * p.ln_ratio(x)
                }
            }
            Self::StudentT(t) => t.std.ln_pdf((x - t.mu) / t.sigma) - t.sigma.ln(),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// `(F(x), 1 - F(x))`, each computed on its accurate side.
    pub fn cdf_pair(&self, x: f64) -> (f64, f64) {
        match self {
            Self::Pareto(p) => {
                if x <= 0.0 {
                    (0.0, 1.0)
                } else {
                    let ln_sf = p.kappa * p.ln_ratio(x);
                    (-ln_sf.exp_m1(), ln_sf.exp())
                }
            }
            Self::StudentT(t) => t.std.cdf_pair((x - t.mu) / t.sigma),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_pair(x).0
    }

    pub fn sf(&self, x: f64) -> f64 {
        self.cdf_pair(x).1
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile level must lie in (0, 1), got {p}")));
        }
        Ok(self.quantile_pair(p, 1.0 - p))
    }

    /// Quantile from a lower/upper probability pair `(p, q)` with `p + q = 1`.
    pub fn quantile_pair(&self, p: f64, q: f64) -> f64 {
        match self {
            Self::Pareto(par) => {
                let ln_sf = if p <= q { (-p).ln_1p() } else { q.ln() };
                par.gamma * (-ln_sf / par.kappa).exp_m1()
            }
            Self::StudentT(t) => t.mu + t.sigma * t.std.quantile_pair(p, q),
        }
    }

    /// Mean, when finite.
    pub fn mean(&self) -> Option<f64> {
        match self {
            Self::Pareto(p) => (p.kappa > 1.0).then(|| p.gamma / (p.kappa - 1.0)),
            Self::StudentT(t) => (t.nu() > 1.0).then_some(t.mu),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                self.quantile_pair(u, 1.0 - u)
            })
            .collect()
    }
}

/// t copula with `nu` degrees of freedom and correlation matrix `R`.
#[derive(Debug, Clone)]
pub struct TCopula {
    std: StandardT,
    corr: SpdMatrix,
    ln_const: f64,
}

impl TCopula {
    pub fn new(nu: f64, corr: SpdMatrix) -> Result<Self> {
        let d = corr.dim();
        if d < 2 {
            return Err(Error::InvalidParameter("t copula needs dimension >= 2".into()));
        }
        for i in 0..d {
            if (corr.matrix()[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "correlation matrix must have unit diagonal (entry {i} is {})",
                    corr.matrix()[(i, i)]
                )));
            }
        }
        let std = StandardT::new(nu)?;
        let df = d as f64;
        // Standard normalization with Gamma(nu/2)^(d-1).
        let ln_const = ln_gamma(0.5 * (nu + df)) + (df - 1.0) * ln_gamma(0.5 * nu)
            - df * ln_gamma(0.5 * (nu + 1.0))
            - 0.5 * corr.log_det();
        Ok(Self { std, corr, ln_const })
    }

    pub fn nu(&self) -> f64 {
        self.std.nu
    }

    pub fn corr(&self) -> &SpdMatrix {
        &self.corr
    }
}

/// Clayton copula rotated by 180 degrees (upper tail dependence).
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedClayton {
    theta: f64,
    dim: usize,
    ln_const: f64,
}

impl RotatedClayton {
    pub fn new(theta: f64, dim: usize) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter(format!("Clayton theta must be > 0, got {theta}")));
        }
        if dim < 2 {
            return Err(Error::InvalidParameter("Clayton copula needs dimension >= 2".into()));
        }
        let df = dim as f64;
        let ln_const = df * theta.ln() + ln_gamma(1.0 / theta + df) - ln_gamma(1.0 / theta);
        Ok(Self { theta, dim, ln_const })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

#[derive(Debug, Clone)]
pub enum CopulaSpec {
    T(TCopula),
    RotatedClayton(RotatedClayton),
}

impl CopulaSpec {
    pub fn t(nu: f64, corr: SpdMatrix) -> Result<Self> {
        TCopula::new(nu, corr).map(Self::T)
    }

    pub fn rotated_clayton(theta: f64, dim: usize) -> Result<Self> {
        RotatedClayton::new(theta, dim).map(Self::RotatedClayton)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::T(t) => t.corr.dim(),
            Self::RotatedClayton(c) => c.dim,
        }
    }

    /// `log c(u)`; every `u_j` must lie strictly inside `(0, 1)`.
    pub fn ln_density(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: u.len() });
        }
        if let Some(bad) = u.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::Domain(format!("copula argument {bad} outside (0, 1)")));
        }
        let ubar: Vec<f64> = u.iter().map(|v| 1.0 - v).collect();
        Ok(self.ln_density_pairs(u, &ubar))
    }

    pub fn density(&self, u: &[f64]) -> Result<f64> {
        self.ln_density(u).map(f64::exp)
    }

    /// `log c` from `(u, 1 - u)` pairs; `-inf` on or outside the cube boundary.
    pub fn ln_density_pairs(&self, u: &[f64], ubar: &[f64]) -> f64 {
        let inside = u
            .iter()
            .zip(ubar)
            .all(|(a, b)| *a > 0.0 && *b > 0.0 && *a < 1.0 && *b < 1.0);
        if !inside {
            return f64::NEG_INFINITY;
        }
        match self {
            Self::RotatedClayton(c) => {
                let theta = c.theta;
                let df = c.dim as f64;
                let ln_ubar: Vec<f64> = ubar.iter().map(|v| v.ln()).collect();
                let sum_ln: f64 = ln_ubar.iter().sum();
                // s = sum_j ubar_j^(-theta) - d + 1 = 1 + sum_j expm1(-theta ln ubar_j)
                let expo: Vec<f64> = ln_ubar.iter().map(|l| -theta * l).collect();
                let max_expo = expo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let ln_s = if max_expo < 700.0 {
                    expo.iter().map(|a| a.exp_m1()).sum::<f64>().ln_1p()
                } else {
                    let scaled: f64 = expo.iter().map(|a| (a - max_expo).exp()).sum::<f64>()
                        - (df - 1.0) * (-max_expo).exp();
                    max_expo + scaled.ln()
                };
                c.ln_const + (-theta - 1.0) * sum_ln + (-1.0 / theta - df) * ln_s
            }
            Self::T(t) => {
                let nu = t.std.nu;
                let df = u.len() as f64;
                let x: Vec<f64> = u
                    .iter()
                    .zip(ubar)
                    .map(|(p, q)| t.std.quantile_pair(*p, *q))
                    .collect();
                let quad = t.corr.mahalanobis_sq(&x);
                let marg: f64 = x.iter().map(|xj| (xj * xj / nu).ln_1p()).sum();
                t.ln_const - 0.5 * (nu + df) * (quad / nu).ln_1p() + 0.5 * (nu + 1.0) * marg
            }
        }
    }

    /// Population Kendall's tau of the pair `(i, j)`.
    pub fn kendall_tau(&self, i: usize, j: usize) -> f64 {
        match self {
            Self::RotatedClayton(c) => c.theta / (c.theta + 2.0),
            Self::T(t) => 2.0 / PI * t.corr.matrix()[(i, j)].asin(),
        }
    }

    /// `n` draws as `(u, 1 - u)` pairs, row-major `n x d`.
    pub fn sample_pairs<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut u = Vec::with_capacity(n * d);
        let mut ubar = Vec::with_capacity(n * d);
        match self {
            Self::RotatedClayton(c) => {
                // Marshall-Olkin: Gamma(1/theta) frailty mixing unit exponentials.
                let frailty = Gamma::new(1.0 / c.theta, 1.0).expect("theta validated");
                for _ in 0..n {
                    let v: f64 = frailty.sample(rng);
                    for _ in 0..d {
                        let e: f64 = Exp1.sample(rng);
                        let clayton = (-(e / v).ln_1p() / c.theta).exp();
                        // rotation u -> 1 - u
                        u.push(1.0 - clayton);
                        ubar.push(clayton);
                    }
                }
            }
            Self::T(t) => {
                let nu = t.std.nu;
                let chi = Gamma::new(0.5 * nu, 2.0 / nu).expect("nu validated");
                let mut z = vec![0.0; d];
                for _ in 0..n {
                    for zj in z.iter_mut() {
                        *zj = StandardNormal.sample(rng);
                    }
                    let w: f64 = chi.sample(rng);
                    let scale = 1.0 / w.sqrt();
                    for xj in t.corr.color(&z) {
                        let (p, q) = t.std.cdf_pair(xj * scale);
                        u.push(p);
                        ubar.push(q);
                    }
                }
            }
        }
        (u, ubar)
    }

    /// `n` draws in `(0, 1)^d`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
        let d = self.dim();
        let (u, _) = self.sample_pairs(n, rng);
        u.chunks(d).map(<[f64]>::to_vec).collect()
    }
}

/// Multivariate Student-t `t_nu(mu, Sigma)`.
#[derive(Debug, Clone)]
pub struct MvtSpec {
    nu: f64,
    mu: Vec<f64>,
    scale: SpdMatrix,
    ln_const: f64,
}

impl MvtSpec {
    pub fn new(nu: f64, mu: Vec<f64>, scale: SpdMatrix) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("degrees of freedom must be > 0, got {nu}")));
        }
        if mu.len() != scale.dim() {
            return Err(Error::DimensionMismatch { expected: scale.dim(), got: mu.len() });
        }
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParameter("location must be finite".into()));
        }
        let df = mu.len() as f64;
        // Standard normalization with (pi nu)^d.
        let ln_const = ln_gamma(0.5 * (nu + df))
            - ln_gamma(0.5 * nu)
            - 0.5 * df * (PI * nu).ln()
            - 0.5 * scale.log_det();
        Ok(Self { nu, mu, scale, ln_const })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn scale(&self) -> &SpdMatrix {
        &self.scale
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn ln_density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(self.ln_density_unchecked(x))
    }

    pub(crate) fn ln_density_unchecked(&self, x: &[f64]) -> f64 {
        let centered: Vec<f64> = x.iter().zip(&self.mu).map(|(a, m)| a - m).collect();
        let quad = self.scale.mahalanobis_sq(&centered);
        self.ln_const - 0.5 * (self.nu + self.dim() as f64) * (quad / self.nu).ln_1p()
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
        let d = self.dim();
        let chi = Gamma::new(0.5 * self.nu, 2.0 / self.nu).expect("nu validated");
        let mut z = vec![0.0; d];
        (0..n)
            .map(|_| {
                for zj in z.iter_mut() {
                    *zj = StandardNormal.sample(rng);
                }
                let w: f64 = chi.sample(rng);
                let scale = 1.0 / w.sqrt();
                self.scale
                    .color(&z)
                    .into_iter()
                    .zip(&self.mu)
                    .map(|(c, m)| m + c * scale)
                    .collect()
            })
            .collect()
    }
}

/// Dirichlet law scaled onto the v-simplex `{w >= 0, sum w = v}`.
///
/// Densities are expressed over the first `d - 1` coordinates; the last is
/// implied by the sum.
#[derive(Debug, Clone)]
pub struct DirichletSpec {
    alpha: Vec<f64>,
    scale: f64,
    gammas: Vec<Gamma<f64>>,
    ln_const: f64,
}

impl DirichletSpec {
    pub fn new(alpha: Vec<f64>, scale: f64) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::InvalidParameter("Dirichlet needs at least two parameters".into()));
        }
        if alpha.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidParameter(format!("Dirichlet parameters must be > 0: {alpha:?}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("simplex scale must be > 0, got {scale}")));
        }
        let total: f64 = alpha.iter().sum();
        let d = alpha.len() as f64;
        let ln_const = ln_gamma(total) - alpha.iter().map(|a| ln_gamma(*a)).sum::<f64>()
            - (d - 1.0) * scale.ln();
        let gammas = alpha
            .iter()
            .map(|a| Gamma::new(*a, 1.0).expect("alpha validated"))
            .collect();
        Ok(Self { alpha, scale, gammas, ln_const })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// Log density at the reduced point `x` (length `d - 1`), `-inf` outside
    /// the open simplex.
    pub fn ln_density(&self, x: &[f64]) -> Result<f64> {
        if x.len() + 1 != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim() - 1, got: x.len() });
        }
        Ok(self.ln_density_unchecked(x))
    }

    pub(crate) fn ln_density_unchecked(&self, x: &[f64]) -> f64 {
        let last = self.scale - x.iter().sum::<f64>();
        if !(last > 0.0) || x.iter().any(|v| !(*v > 0.0)) {
            return f64::NEG_INFINITY;
        }
        let v = self.scale;
        let body: f64 = x
            .iter()
            .chain(std::iter::once(&last))
            .zip(&self.alpha)
            .map(|(w, a)| (a - 1.0) * (w / v).ln())
            .sum();
        self.ln_const + body
    }

    /// One full `d`-vector on the v-simplex.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let g: Vec<f64> = self.gammas.iter().map(|gamma| gamma.sample(rng)).collect();
        let total: f64 = g.iter().sum();
        g.into_iter().map(|gi| self.scale * gi / total).collect()
    }
}
