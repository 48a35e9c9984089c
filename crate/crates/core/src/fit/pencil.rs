//! Matrix-pencil estimation of the poles of `f_n = sum_i b_i z_i^n`.

use alloc::vec::Vec;

use crate::linalg::{eigenvalues, lstsq, svd, RealMatrix};
use crate::{Error, Result, C64};

/// Relative size of the smallest retained singular value below which the
/// requested order exceeds the numerical rank of the data.
pub const RANK_TOLERANCE: f64 = 1e-11;

/// Estimates `order` poles from uniformly sampled values. Fails when the
/// Hankel matrix has numerical rank below `order`.
pub fn matrix_pencil(values: &[f64], order: usize) -> Result<Vec<C64>> {
    let n = values.len();
    if order == 0 || n < 2 * order + 1 {
        return Err(Error::TooFewSamples {
            needed: 2 * order.max(1) + 1,
            have: n,
        });
    }
    let l = (n / 2).max(order);
    let rows = n - l;
    let hankel = RealMatrix::from_fn(rows, l + 1, |i, j| values[i + j]);
    let d = svd(&hankel);
    let top = d.sigma.first().copied().unwrap_or(0.0);
    if top.is_nan() || top <= 0.0 || d.sigma[order - 1] < RANK_TOLERANCE * top {
        return Err(Error::DegenerateFit("ill-conditioned Hankel matrix".into()));
    }
    let v1 = RealMatrix::from_fn(l, order, |i, j| d.v[(i, j)]);
    let v2 = RealMatrix::from_fn(l, order, |i, j| d.v[(i + 1, j)]);
    let pencil = lstsq(&v1, &v2, 1e-14)?;
    let z = eigenvalues(&pencil.to_complex())?;
    if z.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::DegenerateFit("non-finite pencil eigenvalue".into()));
    }
    Ok(z)
}
