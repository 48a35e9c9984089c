use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use crate::clifford::{ElementRef, ExtendedCliffordSet};
use crate::linalg::{eigenvalues, ComplexMatrix, RealMatrix};
use crate::{tol, Error, Result, C64};

use super::Channel;

/// Column-stochastic matrix of population transfers on diagonal states:
/// `M[i][j]` is the probability of moving from level `j` to level `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    m: RealMatrix,
}

impl TransitionMatrix {
    pub fn new(m: RealMatrix) -> Result<Self> {
        let n = m.rows();
        if m.cols() != n {
            return Err(Error::NotSquare {
                rows: n,
                cols: m.cols(),
            });
        }
        for j in 0..n {
            let mut sum = 0.0;
            for i in 0..n {
                let v = m[(i, j)];
                if !v.is_finite() || v < -tol::ALGEBRAIC {
                    return Err(Error::TransitionInvariant(format!(
                        "entry ({i}, {j}) = {v:e} is not a probability"
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > tol::STOCHASTIC {
                return Err(Error::TransitionInvariant(format!(
                    "column {j} sums to {sum:.12}"
                )));
            }
        }
        Ok(Self { m })
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.m
    }

    /// `M^y p`.
    pub fn evolve(&self, p: &[f64], y: usize) -> Vec<f64> {
        let mut v = p.to_vec();
        for _ in 0..y {
            v = self.m.mul_vec(&v);
        }
        v
    }

    /// `<meas| M^y |prep>`.
    pub fn expectation(&self, meas: &[f64], prep: &[f64], y: usize) -> f64 {
        self.evolve(prep, y)
            .iter()
            .zip(meas)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// `<i| M^y |i>` for basis state `i`.
    pub fn survival(&self, index: usize, y: usize) -> f64 {
        let mut p = alloc::vec![0.0; self.dim()];
        p[index] = 1.0;
        self.evolve(&p, y)[index]
    }

    /// Eigenvalues sorted by descending modulus; complex pairs retained.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        eigenvalues(&self.m.to_complex())
    }

    /// `max |M - M^T|`.
    pub fn asymmetry(&self) -> f64 {
        self.m.max_abs_diff(&self.m.transpose())
    }
}

/// `|U_ij|^2`.
pub fn born_matrix(u: &ComplexMatrix) -> RealMatrix {
    RealMatrix::from_fn(u.rows(), u.cols(), |i, j| u[(i, j)].norm_sqr())
}

fn kraus_born_sum(kraus: &[ComplexMatrix]) -> RealMatrix {
    let d = kraus[0].rows();
    let mut m = RealMatrix::zeros(d, d);
    for k in kraus {
        for (dst, z) in m.as_mut_slice().iter_mut().zip(k.as_slice()) {
            *dst += z.norm_sqr();
        }
    }
    m
}

/// `M[i][j] = <i| ch(|j><j|) |i> = sum_k |K_k[i][j]|^2`.
pub fn restrict_to_diagonal(ch: &Channel) -> Result<TransitionMatrix> {
    TransitionMatrix::new(kraus_born_sum(ch.kraus()))
}

/// Population transfers of `C^dagger ch C` for one set element.
pub fn twirl_term(ch: &Channel, element: &ElementRef<'_>) -> RealMatrix {
    let g = element.clifford.gate.full();
    let gd = g.adjoint();
    let d = element.mask_diagonal();
    let n = g.rows();
    let kraus: Vec<ComplexMatrix> = ch
        .kraus()
        .iter()
        .map(|k| {
            let masked = ComplexMatrix::from_fn(n, n, |i, j| k[(i, j)] * (d[i] * d[j]));
            &(&gd * &masked) * g
        })
        .collect();
    kraus_born_sum(&kraus)
}

/// Elements per partial sum; fixes the floating-point reduction order.
pub const TWIRL_CHUNK: usize = 256;

/// Sum of [`twirl_term`] over set elements in `range`, in index order.
pub fn twirl_chunk(ch: &Channel, set: &ExtendedCliffordSet, range: Range<usize>) -> RealMatrix {
    let d = set.dim();
    let mut acc = RealMatrix::zeros(d, d);
    for i in range {
        let t = twirl_term(ch, &set.element(i));
        for (a, b) in acc.as_mut_slice().iter_mut().zip(t.as_slice()) {
            *a += b;
        }
    }
    acc
}

/// Result of [`twirl`]; `warning` is set when the set is not a twirl design.
#[derive(Clone, Debug)]
pub struct Twirled {
    pub matrix: TransitionMatrix,
    pub warning: Option<&'static str>,
}

pub(crate) const NOT_TWIRL_DESIGN: &str =
    "set is not a twirl design; the average does not describe the protocol";

/// Exact average of the population transfers of `C^dagger ch C` over every
/// element of the set, accumulated in chunks of [`TWIRL_CHUNK`].
pub fn twirl(ch: &Channel, set: &ExtendedCliffordSet) -> Result<Twirled> {
    twirl_from_chunks(
        set,
        (0..set.len())
            .step_by(TWIRL_CHUNK)
            .map(|start| twirl_chunk(ch, set, start..(start + TWIRL_CHUNK).min(set.len()))),
        ch.dim(),
    )
}

/// Combines chunk sums (in chunk order) into the normalized twirl.
pub fn twirl_from_chunks(
    set: &ExtendedCliffordSet,
    chunks: impl IntoIterator<Item = RealMatrix>,
    ch_dim: usize,
) -> Result<Twirled> {
    let d = set.dim();
    if ch_dim != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: ch_dim,
        });
    }
    let mut acc = RealMatrix::zeros(d, d);
    for c in chunks {
        for (a, b) in acc.as_mut_slice().iter_mut().zip(c.as_slice()) {
            *a += b;
        }
    }
    let inv = 1.0 / set.len() as f64;
    acc.as_mut_slice().iter_mut().for_each(|x| *x *= inv);
    Ok(Twirled {
        matrix: TransitionMatrix::new(acc)?,
        warning: (!set.twirl_design()).then_some(NOT_TWIRL_DESIGN),
    })
}
