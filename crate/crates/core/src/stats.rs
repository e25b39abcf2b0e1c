//! Descriptive statistics over row-major sample matrices.

use crate::error::{Error, Result};

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation with the `1/(n-1)` normalization.
pub fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() as f64 - 1.0)).sqrt()
}

/// Column means of an `n x k` row-major matrix.
pub fn column_means(rows: &[f64], k: usize) -> Vec<f64> {
    let n = rows.len() / k;
    let mut acc = vec![0.0; k];
    for row in rows.chunks_exact(k) {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    acc.iter().map(|a| a / n as f64).collect()
}

/// Covariance of the columns of an `n x k` row-major matrix with the `1/n`
/// normalization, returned as `k` rows.
pub fn covariance(rows: &[f64], k: usize) -> Vec<Vec<f64>> {
    let n = rows.len() / k;
    let m = column_means(rows, k);
    let mut cov = vec![vec![0.0; k]; k];
    for row in rows.chunks_exact(k) {
        for i in 0..k {
            let di = row[i] - m[i];
            for j in 0..=i {
                cov[i][j] += di * (row[j] - m[j]);
            }
        }
    }
    for i in 0..k {
        for j in 0..=i {
            cov[i][j] /= n as f64;
            cov[j][i] = cov[i][j];
        }
    }
    cov
}

/// Kendall's tau-b, in `O(n log n)` via Knight's merge-sort algorithm.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidParameter("Kendall's tau needs at least two pairs".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::Domain("Kendall's tau of NaN data".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let tied_runs = |sorted: &[f64]| -> u64 {
        let mut total = 0u64;
        let mut run = 1u64;
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                total += run * (run - 1) / 2;
                run = 1;
            }
        }
        total + run * (run - 1) / 2
    };

    let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let n1 = tied_runs(&xs);

    // pairs tied in both coordinates
    let mut n3 = 0u64;
    let mut run = 1u64;
    for k in 1..n {
        if xs[k] == xs[k - 1] && ys[k] == ys[k - 1] {
            run += 1;
        } else {
            n3 += run * (run - 1) / 2;
            run = 1;
        }
    }
    n3 += run * (run - 1) / 2;

    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);
    let n2 = tied_runs(&ys);

    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let numer = n0 as f64 - n1 as f64 - n2 as f64 + n3 as f64 - 2.0 * swaps as f64;
    let denom = ((n0 - n1) as f64).sqrt() * ((n0 - n2) as f64).sqrt();
    if denom == 0.0 {
        return Err(Error::Domain("Kendall's tau undefined for a constant sample".into()));
    }
    Ok(numer / denom)
}

// Sorts `v` ascending and returns the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (left, right) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(left, bl) + merge_count(right, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn naive_tau_b(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let (mut s, mut tx, mut ty) = (0.0, 0.0, 0.0);
        let mut n0 = 0.0;
        for i in 0..n {
            for j in 0..i {
                let a = (x[i] - x[j]).signum() * ((x[i] != x[j]) as i32 as f64);
                let b = (y[i] - y[j]).signum() * ((y[i] != y[j]) as i32 as f64);
                s += a * b;
                n0 += 1.0;
                tx += (a == 0.0) as i32 as f64;
                ty += (b == 0.0) as i32 as f64;
            }
        }
        s / ((n0 - tx) * (n0 - ty)).sqrt()
    }

    #[test]
    fn tau_small_cases() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_relative_eq!(kendall_tau(&x, &x).unwrap(), 1.0);
        assert_relative_eq!(kendall_tau(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert_relative_eq!(kendall_tau(&x, &[1.0, 3.0, 2.0, 4.0]).unwrap(), 4.0 / 6.0);
        assert!(kendall_tau(&x, &[1.0; 4]).is_err());
    }

    #[test]
    fn covariance_of_known_matrix() {
        let rows = [1.0, 2.0, 3.0, 6.0];
        let c = covariance(&rows, 2);
        assert_relative_eq!(c[0][0], 1.0);
        assert_relative_eq!(c[1][1], 4.0);
        assert_relative_eq!(c[0][1], 2.0);
    }

    proptest! {
        #[test]
        fn tau_matches_quadratic_definition(
            pairs in prop::collection::vec((0i32..6, 0i32..6), 3..40)
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
            let naive = naive_tau_b(&x, &y);
            match kendall_tau(&x, &y) {
                Ok(t) => prop_assert!((t - naive).abs() < 1e-12, "{} vs {}", t, naive),
                Err(_) => prop_assert!(naive.is_nan()),
            }
        }
    }
}
