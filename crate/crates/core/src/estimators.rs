//! Empirical VaR and the sample-based allocation estimators.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mcmc::CltReport;
use crate::stats;

/// `n` loss vectors (row-major, `n x d`) with their row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    dim: usize,
    x: Vec<f64>,
    s: Vec<f64>,
}

impl SampleBatch {
    pub fn new(dim: usize, x: Vec<f64>) -> Result<Self> {
        if dim == 0 || x.is_empty() || x.len() % dim != 0 {
            return Err(Error::InvalidParameter(format!(
                "sample of {} values does not split into nonempty rows of length {dim}",
                x.len()
            )));
        }
        let s = x.chunks_exact(dim).map(|r| r.iter().sum()).collect();
        Ok(Self { dim, x, s })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter("rows have unequal lengths".into()));
        }
        Self::new(dim, rows.concat())
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn sums(&self) -> &[f64] {
        &self.s
    }

    /// Row indices with `|S_i - v| <= delta`.
    pub fn window(&self, v: f64, delta: f64) -> Vec<usize> {
        (0..self.len()).filter(|&i| (self.s[i] - v).abs() <= delta).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "MC")]
    Mc,
    #[serde(rename = "NW")]
    Nw,
    #[serde(rename = "GR")]
    Gr,
    #[serde(rename = "MCMC")]
    Mcmc,
    #[serde(rename = "Oracle")]
    Oracle,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Mc => "MC",
            Method::Nw => "NW",
            Method::Gr => "GR",
            Method::Mcmc => "MCMC",
            Method::Oracle => "Oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimateMeta {
    Mc { delta: f64, m: usize, window_cov: Vec<Vec<f64>> },
    Nw { bandwidth: f64 },
    Gr { beta0: Vec<f64>, beta1: Vec<f64> },
    Mcmc { n: usize, acceptance_rate: Option<f64>, clt: Option<CltReport> },
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationEstimate {
    pub method: Method,
    pub ac: Vec<f64>,
    pub stderr: Option<Vec<f64>>,
    pub meta: EstimateMeta,
}

impl AllocationEstimate {
    pub fn oracle(ac: Vec<f64>) -> Self {
        Self { method: Method::Oracle, ac, stderr: None, meta: EstimateMeta::Oracle }
    }
}

fn check_level(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("confidence level must lie in (0, 1), got {p}")))
    }
}

/// Empirical VaR: the `ceil(n p)`-th smallest element of `s`.
pub fn var_order_stat(s: &[f64], p: f64) -> Result<f64> {
    check_level(p)?;
    if s.is_empty() {
        return Err(Error::InvalidParameter("VaR of an empty sample".into()));
    }
    if s.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("sample contains NaN".into()));
    }
    let n = s.len();
    let rank = ((n as f64 * p).ceil() as usize).clamp(1, n);
    let mut work = s.to_vec();
    let (_, kth, _) = work.select_nth_unstable_by(rank - 1, f64::total_cmp);
    Ok(*kth)
}

/// Half-width `delta` of the window `[v - delta, v + delta]` holding the
/// `target_m` sums closest to `v`.
pub fn select_delta(s: &[f64], v: f64, target_m: usize) -> Result<f64> {
    if target_m < 1 {
        return Err(Error::InvalidParameter("target window size must be at least 1".into()));
    }
    if target_m > s.len() {
        return Err(Error::InvalidParameter(format!(
            "target window size {target_m} exceeds sample size {}",
            s.len()
        )));
    }
    let mut dist: Vec<f64> = s.iter().map(|x| (x - v).abs()).collect();
    let (_, kth, _) = dist.select_nth_unstable_by(target_m - 1, f64::total_cmp);
    Ok(kth.max(f64::MIN_POSITIVE))
}

/// Crude Monte Carlo: the mean of the rows whose sum lies within `delta` of `v`.
pub fn mc_allocation(batch: &SampleBatch, v: f64, delta: f64) -> Result<AllocationEstimate> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("window half-width must be positive, got {delta}")));
    }
    let d = batch.dim();
    let members = batch.window(v, delta);
    if members.is_empty() {
        return Err(Error::EstimationFailure(format!(
            "no sums within {delta} of {v}; widen the window"
        )));
    }
    let rows: Vec<f64> = members.iter().flat_map(|&i| batch.row(i).iter().copied()).collect();
    let m = members.len();
    let ac = stats::column_means(&rows, d);
    let window_cov = stats::covariance(&rows, d);
    let stderr = (0..d).map(|j| (window_cov[j][j] / m as f64).sqrt()).collect();
    Ok(AllocationEstimate {
        method: Method::Mc,
        ac,
        stderr: Some(stderr),
        meta: EstimateMeta::Mc { delta, m, window_cov },
    })
}

/// Silverman's rule of thumb `1.06 sd(S) n^(-1/5)`.
pub fn silverman_bandwidth(s: &[f64]) -> f64 {
    1.06 * stats::std_dev(s) * (s.len() as f64).powf(-0.2)
}

/// Nadaraya-Watson regression of `X` on `S` at `v` with a Gaussian kernel.
pub fn nw_allocation(batch: &SampleBatch, v: f64, h: Option<f64>) -> Result<AllocationEstimate> {
    if batch.len() < 2 {
        return Err(Error::InvalidParameter("kernel estimator needs at least two samples".into()));
    }
    let h = h.unwrap_or_else(|| silverman_bandwidth(batch.sums()));
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}")));
    }
    let d = batch.dim();
    let mut num = vec![0.0; d];
    let mut den = 0.0;
    for (row, s) in batch.rows().zip(batch.sums()) {
        let z = (s - v) / h;
        let w = (-0.5 * z * z).exp();
        if w == 0.0 {
            continue;
        }
        den += w;
        for (acc, x) in num.iter_mut().zip(row) {
            *acc += w * x;
        }
    }
    if den == 0.0 {
        return Err(Error::EstimationFailure(format!(
            "all kernel weights underflow at v = {v} with bandwidth {h}"
        )));
    }
    Ok(AllocationEstimate {
        method: Method::Nw,
        ac: num.iter().map(|a| a / den).collect(),
        stderr: None,
        meta: EstimateMeta::Nw { bandwidth: h },
    })
}

/// Generalized regression with a linear model: per-component OLS of `X_j`
/// on `(1, S)` evaluated at `v`.
pub fn gr_allocation(batch: &SampleBatch, v: f64) -> Result<AllocationEstimate> {
    let n = batch.len();
    if n < 3 {
        return Err(Error::InvalidParameter("regression estimator needs at least three samples".into()));
    }
    let d = batch.dim();
    let s = batch.sums();
    let s_bar = stats::mean(s);
    let sxx: f64 = s.iter().map(|x| (x - s_bar) * (x - s_bar)).sum();
    if !(sxx > 0.0) {
        return Err(Error::EstimationFailure("sums have zero variance; design matrix is singular".into()));
    }
    let x_bar = stats::column_means(batch.values(), d);
    let mut sxy = vec![0.0; d];
    for (row, si) in batch.rows().zip(s) {
        let ds = si - s_bar;
        for (acc, (x, m)) in sxy.iter_mut().zip(row.iter().zip(&x_bar)) {
            *acc += ds * (x - m);
        }
    }
    let beta1: Vec<f64> = sxy.iter().map(|c| c / sxx).collect();
    let beta0: Vec<f64> = x_bar.iter().zip(&beta1).map(|(m, b)| m - b * s_bar).collect();

    let mut ssr = vec![0.0; d];
    for (row, si) in batch.rows().zip(s) {
        for j in 0..d {
            let e = row[j] - beta0[j] - beta1[j] * si;
            ssr[j] += e * e;
        }
    }
    // x'(Y'Y/n)^{-1}x for x = (1, v), written in centered form
    let var_s = sxx / n as f64;
    let leverage = 1.0 + (v - s_bar) * (v - s_bar) / var_s;
    let stderr = ssr
        .iter()
        .map(|r| (r / (n as f64 - 2.0) * leverage).sqrt() / (n as f64).sqrt())
        .collect();
    let ac = x_bar.iter().zip(&beta1).map(|(m, b)| m + b * (v - s_bar)).collect();
    Ok(AllocationEstimate {
        method: Method::Gr,
        ac,
        stderr: Some(stderr),
        meta: EstimateMeta::Gr { beta0, beta1 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn var_examples() {
        let s: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(var_order_stat(&s, 0.9).unwrap(), 9.0);
        assert_eq!(var_order_stat(&[2.5; 7], 0.37).unwrap(), 2.5);
        assert!(var_order_stat(&[], 0.9).is_err());
        assert!(var_order_stat(&s, 1.0).is_err());
    }

    #[test]
    fn delta_examples() {
        let s = [0.0, 1.0, 2.0, 3.0];
        assert_relative_eq!(select_delta(&s, 1.4, 2).unwrap(), 0.6, epsilon = 1e-15);
        assert_relative_eq!(select_delta(&s, 1.4, 4).unwrap(), 1.6, epsilon = 1e-15);
        assert!(select_delta(&s, 1.4, 0).is_err());
        assert!(select_delta(&s, 1.4, 5).is_err());
    }

    #[test]
    fn mc_examples() {
        let b = SampleBatch::from_rows(&vec![vec![1.0, 2.0, 3.0]; 4]).unwrap();
        let est = mc_allocation(&b, 6.0, 0.1).unwrap();
        assert_eq!(est.ac, vec![1.0, 2.0, 3.0]);
        assert_eq!(est.stderr.unwrap(), vec![0.0; 3]);

        let b = SampleBatch::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0], vec![9.0, 9.0, 9.0]]).unwrap();
        let est = mc_allocation(&b, 1.5, 0.5).unwrap();
        assert_eq!(est.ac, vec![0.5, 0.5, 0.5]);
        assert!(matches!(est.meta, EstimateMeta::Mc { m: 2, .. }));
        assert!(matches!(mc_allocation(&b, 100.0, 1.0), Err(Error::EstimationFailure(_))));
    }

    #[test]
    fn nw_examples() {
        let b = SampleBatch::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![100.0, 0.0, 0.0]]).unwrap();
        let est = nw_allocation(&b, 6.0, Some(0.05)).unwrap();
        for (a, x) in est.ac.iter().zip([1.0, 2.0, 3.0]) {
            assert_relative_eq!(*a, x, epsilon = 1e-12);
        }
        assert!(est.stderr.is_none());

        let c = SampleBatch::from_rows(&[vec![1.0, 2.0, 0.5], vec![1.0, 2.0, 7.0], vec![1.0, 2.0, 3.0]]).unwrap();
        for h in [None, Some(0.3), Some(50.0)] {
            let est = nw_allocation(&c, 5.0, h).unwrap();
            assert_relative_eq!(est.ac[0], 1.0, epsilon = 1e-14);
            assert_relative_eq!(est.ac[1], 2.0, epsilon = 1e-14);
        }
        assert!(matches!(nw_allocation(&b, 1e6, Some(1e-3)), Err(Error::EstimationFailure(_))));
    }

    #[test]
    fn gr_exact_linear_recovery() {
        let a = [0.5, -1.0, 0.5];
        let bcoef = [0.2, 0.3, 0.5];
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|i| {
                let s = i as f64 * 0.37 - 3.0;
                (0..3).map(|j| a[j] + bcoef[j] * s).collect()
            })
            .collect();
        let b = SampleBatch::from_rows(&rows).unwrap();
        let v = 4.2;
        let est = gr_allocation(&b, v).unwrap();
        for j in 0..3 {
            assert_relative_eq!(est.ac[j], a[j] + bcoef[j] * v, epsilon = 1e-10);
            assert!(est.stderr.as_ref().unwrap()[j] < 1e-10);
        }
        assert_relative_eq!(est.ac.iter().sum::<f64>(), v, epsilon = 1e-10);
    }

    #[test]
    fn gr_rejects_constant_sums() {
        let b = SampleBatch::from_rows(&[vec![1.0, 2.0, 0.0], vec![2.0, 1.0, 0.0], vec![0.0, 3.0, 0.0]]).unwrap();
        assert!(matches!(gr_allocation(&b, 3.0), Err(Error::EstimationFailure(_))));
    }
}
