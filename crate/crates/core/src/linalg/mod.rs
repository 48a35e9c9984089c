//! Dense linear algebra sized for `3^N`-dimensional registers (`N <= 3`).

mod eig;
mod haar;
mod matrix;
mod prob;
mod svd;

pub use eig::{eig, eigenvalues, Eigen};
pub use haar::{complex_gaussian, haar_unitary};
pub use matrix::{ComplexMatrix, RealMatrix};
pub use prob::ProbabilityVector;
pub use svd::{lstsq, solve, svd, Svd};

use num_traits::Zero;

use crate::{Error, Result, C64};

/// Kronecker product with the first factor most significant.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Traces out the environment of a `(sys_dim * env_dim)`-square operator
/// whose index is `s * env_dim + e`.
pub fn partial_trace_env(
    m: &ComplexMatrix,
    sys_dim: usize,
    env_dim: usize,
) -> Result<ComplexMatrix> {
    let n = m.require_square()?;
    if n != sys_dim * env_dim {
        return Err(Error::DimensionMismatch {
            expected: sys_dim * env_dim,
            found: n,
        });
    }
    Ok(ComplexMatrix::from_fn(sys_dim, sys_dim, |i, j| {
        let mut acc = C64::zero();
        for e in 0..env_dim {
            acc += m[(i * env_dim + e, j * env_dim + e)];
        }
        acc
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use rand::Rng;

    fn random_matrix(n: usize, rng: &mut crate::Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn random_density(n: usize, rng: &mut crate::Rng) -> ComplexMatrix {
        let g = random_matrix(n, rng);
        let rho = &g * &g.adjoint();
        let tr = rho.trace();
        rho.scale(tr.inv())
    }

    #[test]
    fn kron_mixed_product_property() {
        let mut rng = crate::rng_from_seed(4);
        let (a, b, c, d) = (
            random_matrix(3, &mut rng),
            random_matrix(3, &mut rng),
            random_matrix(3, &mut rng),
            random_matrix(3, &mut rng),
        );
        let lhs = &kron(&a, &b) * &kron(&c, &d);
        let rhs = kron(&(&a * &c), &(&b * &d));
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn product_state_reduces_to_system() {
        let mut rng = crate::rng_from_seed(9);
        let rs = random_density(3, &mut rng);
        let re = random_density(2, &mut rng);
        let out = partial_trace_env(&kron(&rs, &re), 3, 2).unwrap();
        assert!(out.max_abs_diff(&rs) < 1e-12);
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let psi: Vec<C64> = [h, 0.0, 0.0, h].iter().map(|&x| C64::new(x, 0.0)).collect();
        let rho = ComplexMatrix::from_fn(4, 4, |i, j| psi[i] * psi[j].conj());
        let out = partial_trace_env(&rho, 2, 2).unwrap();
        let half = ComplexMatrix::identity(2).scale(C64::new(0.5, 0.0));
        assert!(out.max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let mut rng = crate::rng_from_seed(10);
        for _ in 0..100 {
            let rho = random_density(6, &mut rng);
            let out = partial_trace_env(&rho, 3, 2).unwrap();
            assert!((out.trace() - rho.trace()).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = ComplexMatrix::identity(5);
        assert!(partial_trace_env(&m, 2, 2).is_err());
    }
}
