use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;

use super::ComplexMatrix;
use crate::C64;

/// Standard complex Gaussian entry with `E|z|^2 = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed unitary of the given dimension.
///
/// QR of a complex Ginibre matrix by twice-iterated Gram-Schmidt, with the
/// phases of `R`'s diagonal moved into `Q` so the distribution is exactly
/// Haar rather than biased by the QR sign convention.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    assert!(dim >= 1, "haar_unitary needs dim >= 1");
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(dim);
    let mut r_diag: Vec<C64> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v: Vec<C64> = (0..dim).map(|i| g[(i, j)]).collect();
        let mut diag_coeff = C64::zero();
        for _pass in 0..2 {
            for qk in &q {
                let proj: C64 = qk.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(qk) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        // R_jj = <q_j, g_j>
        for (qi, i) in v.iter().zip(0..dim) {
            diag_coeff += qi.conj() * g[(i, j)];
        }
        r_diag.push(diag_coeff);
        q.push(v);
    }
    ComplexMatrix::from_fn(dim, dim, |i, j| {
        let d = r_diag[j];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        q[j][i] * phase
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dim_one_is_unit_modulus() {
        let mut rng = crate::rng_from_seed(1);
        let u = haar_unitary(1, &mut rng);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn samples_are_unitary() {
        let mut rng = crate::rng_from_seed(2);
        for dim in [2, 3, 4, 9, 27] {
            let u = haar_unitary(dim, &mut rng);
            assert!(u.unitarity_residual() < 1e-10, "dim {dim}");
        }
    }

    #[test]
    fn same_seed_same_matrix() {
        let a = haar_unitary(9, &mut crate::rng_from_seed(77));
        let b = haar_unitary(9, &mut crate::rng_from_seed(77));
        assert_eq!(a.as_slice().len(), b.as_slice().len());
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn second_moment_matches_haar() {
        // E|U_ij|^2 = 1/dim for Haar unitaries
        let mut rng = crate::rng_from_seed(5);
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| haar_unitary(2, &mut rng)[(0, 0)].norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn phase_of_first_entry_is_uniform() {
        // a QR without phase correction concentrates arg(U_00) near 0
        let mut rng = crate::rng_from_seed(8);
        let n = 4000;
        let mean_cos: f64 = (0..n)
            .map(|_| {
                let z = haar_unitary(2, &mut rng)[(0, 0)];
                z.re / z.norm()
            })
            .sum::<f64>()
            / n as f64;
        assert!(mean_cos.abs() < 0.05, "mean cos {mean_cos}");
    }
}
