//! Small dense symmetric positive-definite matrix helper.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A symmetric positive-definite matrix together with its lower Cholesky
/// factor and log-determinant.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    matrix: DMatrix<f64>,
    lower: DMatrix<f64>,
    log_det: f64,
}

impl SpdMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidParameter(format!(
                "matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
        }
        let n = matrix.nrows();
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (matrix[(i, j)], matrix[(j, i)]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let chol = nalgebra::linalg::Cholesky::new(matrix.clone())
            .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))?;
        let lower = chol.l();
        let log_det = 2.0 * lower.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        if !log_det.is_finite() {
            return Err(Error::NotPositiveDefinite("degenerate Cholesky factor".into()));
        }
        Ok(Self { matrix, lower, log_det })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("matrix rows must all have length n".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n)).expect("identity is SPD")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// `z` solving `L z = x`, so that `|z|^2` is the Mahalanobis form.
    pub fn whiten(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut acc = x[i];
            for (k, zk) in z.iter().enumerate().take(i) {
                acc -= self.lower[(i, k)] * zk;
            }
            z[i] = acc / self.lower[(i, i)];
        }
        z
    }

    /// `x^T M^{-1} x`.
    pub fn mahalanobis_sq(&self, x: &[f64]) -> f64 {
        self.whiten(x).iter().map(|v| v * v).sum()
    }

    /// `L z`, mapping a standard normal draw to covariance `M`.
    pub fn color(&self, z: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..=i).map(|k| self.lower[(i, k)] * z[k]).sum())
            .collect()
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        let chol = nalgebra::linalg::Cholesky::new(self.matrix.clone()).expect("validated SPD");
        let inv = chol.inverse();
        // symmetrize away rounding noise
        (&inv + inv.transpose()) * 0.5
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let chol = nalgebra::linalg::Cholesky::new(self.matrix.clone()).expect("validated SPD");
        chol.solve(b)
    }
}
