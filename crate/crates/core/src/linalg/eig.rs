//! General (non-Hermitian) complex eigensolver.
//!
//! Householder reduction to upper Hessenberg form, shifted QR iterations
//! with Givens rotations down to a complex Schur form `A = Z T Z^H`, then
//! back-substitution on the triangular factor for the eigenvectors.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use super::ComplexMatrix;
use crate::{Error, Result, C64};

/// Eigenvalues sorted by descending modulus with matching right eigenvectors
/// as the columns of `vectors` (each of unit 2-norm).
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<C64>,
    pub vectors: ComplexMatrix,
}

const MAX_SWEEPS_PER_VALUE: usize = 60;

pub fn eig(m: &ComplexMatrix) -> Result<Eigen> {
    let n = m.require_square()?;
    if !m.is_finite() {
        return Err(Error::NoConvergence {
            hash: m.content_hash(),
        });
    }
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let (mut t, mut z) = hessenberg(m);
    schur(&mut t, &mut z).map_err(|_| Error::NoConvergence {
        hash: m.content_hash(),
    })?;

    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let y = triangular_eigenvectors(&t);
    let mut vectors = &z * &y;
    for j in 0..n {
        let norm = (0..n)
            .map(|i| vectors[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm > 0.0 {
            for i in 0..n {
                vectors[(i, j)] /= norm;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .norm()
            .partial_cmp(&values[a].norm())
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let sorted_vectors = ComplexMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    Ok(Eigen {
        values: sorted_values,
        vectors: sorted_vectors,
    })
}

/// Eigenvalues only, sorted by descending modulus.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    eig(m).map(|e| e.values)
}

/// Returns `(H, Q)` with `A = Q H Q^H` and `H` upper Hessenberg.
fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let alpha_norm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        // v = x + phase * |x| e1, reflector P = I - 2 v v^H / (v^H v)
        let mut v: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] += phase * alpha_norm;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // H <- P H
        for j in 0..n {
            let mut s = C64::zero();
            for (idx, vi) in v.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + idx, j)];
            }
            s *= beta;
            for (idx, vi) in v.iter().enumerate() {
                h[(k + 1 + idx, j)] -= vi * s;
            }
        }
        // H <- H P, Q <- Q P
        for mat in [&mut h, &mut q] {
            for i in 0..n {
                let mut s = C64::zero();
                for (idx, vi) in v.iter().enumerate() {
                    s += mat[(i, k + 1 + idx)] * vi;
                }
                s *= beta;
                for (idx, vi) in v.iter().enumerate() {
                    mat[(i, k + 1 + idx)] -= s * vi.conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = C64::zero();
        }
    }
    (h, q)
}

struct Stalled;

/// Reduces Hessenberg `h` to upper triangular form in place, accumulating
/// the unitary similarity into `z`.
fn schur(h: &mut ComplexMatrix, z: &mut ComplexMatrix) -> core::result::Result<(), Stalled> {
    let n = h.rows();
    let eps = f64::EPSILON;
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iterations = 0usize;
    let mut budget = MAX_SWEEPS_PER_VALUE * n;

    while hi > 0 {
        // look for a negligible subdiagonal entry
        let mut lo = 0;
        for k in (1..=hi).rev() {
            let s = h[(k, k)].norm() + h[(k - 1, k - 1)].norm();
            let s = if s == 0.0 { scale } else { s };
            if h[(k, k - 1)].norm() <= eps * s {
                h[(k, k - 1)] = C64::zero();
                lo = k;
                break;
            }
        }
        if lo == hi {
            hi -= 1;
            iterations = 0;
            continue;
        }
        if budget == 0 {
            return Err(Stalled);
        }
        budget -= 1;
        iterations += 1;

        let mu = if iterations.is_multiple_of(11) {
            // exceptional shift to break cycles
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for k in lo..=hi {
            h[(k, k)] -= mu;
        }
        let mut rotations: Vec<(C64, C64)> = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            // rows k, k+1 <- G [rows]
            for j in k..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = c.conj() * a + s.conj() * b;
                h[(k + 1, j)] = -s * a + c * b;
            }
            h[(k + 1, k)] = C64::zero();
            rotations.push((c, s));
        }
        for (idx, &(c, s)) in rotations.iter().enumerate() {
            let k = lo + idx;
            let top = (k + 2).min(hi);
            // columns k, k+1 <- [cols] G^H
            for i in 0..=top {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s;
                h[(i, k + 1)] = -a * s.conj() + b * c.conj();
            }
            for i in 0..n {
                let a = z[(i, k)];
                let b = z[(i, k + 1)];
                z[(i, k)] = a * c + b * s;
                z[(i, k + 1)] = -a * s.conj() + b * c.conj();
            }
        }
        for k in lo..=hi {
            h[(k, k)] += mu;
        }
    }
    // clean below-diagonal round-off
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = C64::zero();
        }
    }
    Ok(())
}

/// Rotation `(c, s)` with `[c^* s^*; -s c] [a; b] = [r; 0]`, `|c|^2 + |s|^2 = 1`.
fn givens(a: C64, b: C64) -> (C64, C64) {
    let r = a.norm().hypot(b.norm());
    if r == 0.0 {
        return (C64::new(1.0, 0.0), C64::zero());
    }
    (a / r, b / r)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr * 0.25 - det).sqrt();
    let l1 = tr * 0.5 + disc;
    let l2 = tr * 0.5 - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Eigenvectors of an upper-triangular matrix, one per column.
fn triangular_eigenvectors(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.rows();
    let small = (t.max_abs() * f64::EPSILON).max(f64::MIN_POSITIVE);
    let mut y = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut x = vec![C64::zero(); k + 1];
        x[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = C64::zero();
            for j in i + 1..=k {
                s += t[(i, j)] * x[j];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < small {
                d = C64::new(small, 0.0);
            }
            x[i] = -s / d;
        }
        for (i, xi) in x.into_iter().enumerate() {
            y[(i, k)] = xi;
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_unitary;
    use rand::Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn reconstruction_residual(m: &ComplexMatrix, e: &Eigen) -> f64 {
        let mv = m * &e.vectors;
        let vl = ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| e.vectors[(i, j)] * e.values[j]);
        mv.max_abs_diff(&vl) / m.max_abs()
    }

    #[test]
    fn diagonal_spectrum() {
        let m = ComplexMatrix::from_diag(&[c(0.2), c(1.0), c(0.5)]);
        let e = eig(&m).unwrap();
        let got: Vec<f64> = e.values.iter().map(|z| z.re).collect();
        assert!((got[0] - 1.0).abs() < 1e-14);
        assert!((got[1] - 0.5).abs() < 1e-14);
        assert!((got[2] - 0.2).abs() < 1e-14);
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]).unwrap();
        let e = eig(&m).unwrap();
        let mut ims: Vec<f64> = e.values.iter().map(|z| z.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-12 && (ims[1] - 1.0).abs() < 1e-12);
        assert!(e.values.iter().all(|z| z.re.abs() < 1e-12));
        assert!(reconstruction_residual(&m, &e) < 1e-12);
    }

    #[test]
    fn random_complex_reconstruction() {
        let mut rng = crate::rng_from_seed(11);
        for n in [1usize, 2, 5, 9, 27] {
            let m = ComplexMatrix::from_fn(n, n, |_, _| {
                C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let e = eig(&m).unwrap();
            assert!(reconstruction_residual(&m, &e) < 1e-8, "n = {n}");
            for w in e.values.windows(2) {
                assert!(w[0].norm() >= w[1].norm());
            }
        }
    }

    #[test]
    fn defective_jordan_block_does_not_fail() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        let e = eig(&m).unwrap();
        assert!(e.values.iter().all(|z| (z - c(1.0)).norm() < 1e-12));
    }

    #[test]
    fn unitary_spectrum_on_unit_circle() {
        let mut rng = crate::rng_from_seed(3);
        let u = haar_unitary(7, &mut rng);
        let e = eig(&u).unwrap();
        assert!(e.values.iter().all(|z| (z.norm() - 1.0).abs() < 1e-10));
    }

    #[test]
    fn non_finite_input_reports_hash() {
        let mut m = ComplexMatrix::identity(3);
        m[(1, 2)] = C64::new(f64::NAN, 0.0);
        match eig(&m) {
            Err(Error::NoConvergence { hash }) => assert_eq!(hash, m.content_hash()),
            other => panic!("unexpected {other:?}"),
        }
    }
}
