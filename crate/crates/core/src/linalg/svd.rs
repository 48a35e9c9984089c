//! One-sided Jacobi SVD and dense real solvers for the small systems the
//! decay fitting needs.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::RealMatrix;
use crate::{Error, Result};

/// Thin SVD `A = U diag(sigma) V^T` with singular values descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: RealMatrix,
    pub sigma: Vec<f64>,
    pub v: RealMatrix,
}

pub fn svd(a: &RealMatrix) -> Svd {
    if a.rows() < a.cols() {
        let t = svd(&a.transpose());
        return Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
    }
    let (m, n) = (a.rows(), a.cols());
    let mut w = a.clone();
    let mut v = RealMatrix::identity(n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    alpha += w[(i, p)] * w[(i, p)];
                    beta += w[(i, q)] * w[(i, q)];
                    gamma += w[(i, p)] * w[(i, q)];
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (w[(i, p)], w[(i, q)]);
                    w[(i, p)] = c * x - s * y;
                    w[(i, q)] = s * x + c * y;
                }
                for i in 0..n {
                    let (x, y) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * x - s * y;
                    v[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| w[(i, j)] * w[(i, j)]).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        sigma[b]
            .partial_cmp(&sigma[a])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let u = RealMatrix::from_fn(m, n, |i, j| {
        let k = order[j];
        if sigma[k] > 0.0 {
            w[(i, k)] / sigma[k]
        } else {
            0.0
        }
    });
    let v_sorted = RealMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    sigma = order.iter().map(|&k| sigma[k]).collect();
    Svd {
        u,
        sigma,
        v: v_sorted,
    }
}

/// Minimum-norm least-squares solution of `A X = B` via the SVD, dropping
/// singular values below `rcond * sigma_max`.
pub fn lstsq(a: &RealMatrix, b: &RealMatrix, rcond: f64) -> Result<RealMatrix> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: b.rows(),
        });
    }
    let d = svd(a);
    let cutoff = d.sigma.first().copied().unwrap_or(0.0) * rcond;
    let k = d.sigma.len();
    let mut x = RealMatrix::zeros(a.cols(), b.cols());
    for s in 0..k {
        if d.sigma[s] <= cutoff || d.sigma[s] == 0.0 {
            continue;
        }
        for col in 0..b.cols() {
            let proj: f64 = (0..a.rows())
                .map(|i| d.u[(i, s)] * b[(i, col)])
                .sum::<f64>()
                / d.sigma[s];
            for r in 0..a.cols() {
                x[(r, col)] += d.v[(r, s)] * proj;
            }
        }
    }
    Ok(x)
}

/// Solves the square system `A x = b` by Gaussian elimination with partial
/// pivoting.
pub fn solve(a: &RealMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| m[(i, k)].abs().partial_cmp(&m[(j, k)].abs()).unwrap())
            .unwrap();
        if m[(pivot, k)].abs() <= 1e-300_f64.max(scale * 1e-15) {
            return Err(Error::DegenerateFit("singular linear system".into()));
        }
        if pivot != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(pivot, j)];
                m[(pivot, j)] = tmp;
            }
            x.swap(k, pivot);
        }
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[(i, j)] -= f * m[(k, j)];
            }
            x[i] -= f * x[k];
        }
    }
    let mut out = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[(i, j)] * out[j]).sum();
        out[i] = (x[i] - s) / m[(i, i)];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_reconstructs() {
        let a = RealMatrix::from_vec(
            4,
            3,
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 10.0, -1.0, 0.5, 2.0],
        )
        .unwrap();
        let d = svd(&a);
        let us = RealMatrix::from_fn(4, 3, |i, j| d.u[(i, j)] * d.sigma[j]);
        let back = us.matmul(&d.v.transpose());
        assert!(back.max_abs_diff(&a) < 1e-12);
        assert!(d.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn wide_svd_reconstructs() {
        let a = RealMatrix::from_vec(2, 4, vec![1.0, 0.0, 2.0, -1.0, 3.0, 1.0, 0.0, 4.0]).unwrap();
        let d = svd(&a);
        let us = RealMatrix::from_fn(2, 2, |i, j| d.u[(i, j)] * d.sigma[j]);
        let back = us.matmul(&d.v.transpose());
        assert!(back.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn solve_small_system() {
        let a = RealMatrix::from_vec(2, 2, vec![0.0, 2.0, 1.0, 1.0]).unwrap();
        let x = solve(&a, &[4.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn singular_system_is_reported() {
        let a = RealMatrix::from_vec(2, 2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(solve(&a, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn lstsq_overdetermined_line() {
        // y = 2x + 1 sampled exactly
        let a = RealMatrix::from_fn(5, 2, |i, j| if j == 0 { i as f64 } else { 1.0 });
        let b = RealMatrix::from_fn(5, 1, |i, _| 2.0 * i as f64 + 1.0);
        let x = lstsq(&a, &b, 1e-12).unwrap();
        assert!((x[(0, 0)] - 2.0).abs() < 1e-12 && (x[(1, 0)] - 1.0).abs() < 1e-12);
    }
}
