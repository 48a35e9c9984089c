//! Sequence-extension maps on operators over the diagonal subspace.
//!
//! Appending one random element `C` to a sequence multiplies the running
//! population map by the frame-corrected step `A_C = R(W_C S_C)` on the
//! right and by the residual leakage action `B_C = R(L_C^dagger)` on the
//! left. Here `S_C` is the errored step (gate, error and, for interleaved
//! runs, the fixed gate with its own error), `W_C` is the embedded inverse
//! of the step's computational action, `L_C = W_C (ideal step)` acts only on
//! the leakage subspace, and `R` maps a channel to its population transfers.
//! The map `T(X) = avg_C B_C X A_C` is stored as `avg_C B_C (x) A_C^T`
//! acting on row-major vectorized `X`.

use alloc::vec::Vec;
use core::ops::Range;

use crate::clifford::{comp_inverse, ExtendedCliffordSet, QutritUnitary};
use crate::linalg::{eigenvalues, ComplexMatrix, RealMatrix};
use crate::{Error, Result, C64};

use super::transition::TWIRL_CHUNK;
use super::{born_matrix, Channel, ErrorModel};

#[derive(Clone, Debug)]
pub enum TMapVariant {
    Plain,
    /// Each random element is followed by its error, then `error`, then
    /// `gate`.
    Interleaved {
        gate: QutritUnitary,
        error: Channel,
    },
}

/// Matrix of `X -> avg_C B_C X A_C` on `d x d` real operators.
#[derive(Clone, Debug, PartialEq)]
pub struct TMap {
    dim: usize,
    matrix: RealMatrix,
}

fn is_identity(m: &RealMatrix) -> bool {
    m.max_abs_diff(&RealMatrix::identity(m.rows())) <= crate::tol::ALGEBRAIC
}

/// Unnormalized sum of `B_C (x) A_C^T` over the elements in `range`.
pub fn t_map_chunk(
    model: &ErrorModel,
    set: &ExtendedCliffordSet,
    variant: &TMapVariant,
    range: Range<usize>,
) -> RealMatrix {
    let d = set.dim();
    let dd = d * d;
    let mut acc = RealMatrix::zeros(dd, dd);
    let acc_s = acc.as_mut_slice();
    for idx in range {
        let e = set.element(idx);
        let c_full = e.unitary();
        let err = model.gate_channel(e.clifford.id);
        let (w, ideal, kraus): (QutritUnitary, ComplexMatrix, Vec<ComplexMatrix>) = match variant {
            TMapVariant::Plain => {
                let w = comp_inverse(e.clifford.gate.comp_block());
                let kraus = err
                    .kraus()
                    .iter()
                    .map(|k| &(w.full() * k) * &c_full)
                    .collect();
                (w, c_full.clone(), kraus)
            }
            TMapVariant::Interleaved { gate, error } => {
                let w = comp_inverse(&(gate.comp_block() * e.clifford.gate.comp_block()));
                let wv = w.full() * gate.full();
                let mut kraus = Vec::with_capacity(error.kraus().len() * err.kraus().len());
                for kv in error.kraus() {
                    let left = &wv * kv;
                    for kc in err.kraus() {
                        kraus.push(&(&left * kc) * &c_full);
                    }
                }
                (w, gate.full() * &c_full, kraus)
            }
        };
        let mut a = RealMatrix::zeros(d, d);
        for k in &kraus {
            for (dst, z) in a.as_mut_slice().iter_mut().zip(k.as_slice()) {
                *dst += z.norm_sqr();
            }
        }
        let residual = w.full() * &ideal;
        let b = born_matrix(&residual).transpose();
        if is_identity(&b) {
            for blk in 0..d {
                for r in 0..d {
                    for c in 0..d {
                        acc_s[(blk * d + r) * dd + blk * d + c] += a[(c, r)];
                    }
                }
            }
        } else {
            for bi in 0..d {
                for bj in 0..d {
                    let bv = b[(bi, bj)];
                    if bv == 0.0 {
                        continue;
                    }
                    for r in 0..d {
                        for c in 0..d {
                            acc_s[(bi * d + r) * dd + bj * d + c] += bv * a[(c, r)];
                        }
                    }
                }
            }
        }
    }
    acc
}

/// Builds the T-map by summing chunks of [`TWIRL_CHUNK`] elements in index
/// order.
pub fn build_t_map(
    model: &ErrorModel,
    set: &ExtendedCliffordSet,
    variant: &TMapVariant,
) -> Result<TMap> {
    check_inputs(model, set, variant)?;
    TMap::from_chunks(
        set,
        (0..set.len())
            .step_by(TWIRL_CHUNK)
            .map(|s| t_map_chunk(model, set, variant, s..(s + TWIRL_CHUNK).min(set.len()))),
    )
}

/// Validates model and variant dimensions against the set.
pub fn check_inputs(
    model: &ErrorModel,
    set: &ExtendedCliffordSet,
    variant: &TMapVariant,
) -> Result<()> {
    model.check_covers(set)?;
    if let TMapVariant::Interleaved { gate, error } = variant {
        for found in [gate.dim(), error.dim()] {
            if found != set.dim() {
                return Err(Error::DimensionMismatch {
                    expected: set.dim(),
                    found,
                });
            }
        }
    }
    Ok(())
}

impl TMap {
    /// Normalizes chunk sums produced by [`t_map_chunk`] (in chunk order).
    pub fn from_chunks(
        set: &ExtendedCliffordSet,
        chunks: impl IntoIterator<Item = RealMatrix>,
    ) -> Result<Self> {
        let d = set.dim();
        let mut m = RealMatrix::zeros(d * d, d * d);
        for c in chunks {
            for (a, b) in m.as_mut_slice().iter_mut().zip(c.as_slice()) {
                *a += b;
            }
        }
        let inv = 1.0 / set.len() as f64;
        m.as_mut_slice().iter_mut().for_each(|x| *x *= inv);
        Ok(Self { dim: d, matrix: m })
    }

    /// Register dimension `d`; the map acts on `d x d` operators.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &RealMatrix) -> RealMatrix {
        let v = self.matrix.mul_vec(x.as_slice());
        RealMatrix::from_vec(self.dim, self.dim, v).expect("square")
    }

    /// `T^y(1)`.
    pub fn power_identity(&self, y: usize) -> RealMatrix {
        let mut x = RealMatrix::identity(self.dim);
        for _ in 0..y {
            x = self.apply(&x);
        }
        x
    }

    /// `<i| T^y(1) |i>`.
    pub fn fidelity(&self, index: usize, y: usize) -> f64 {
        self.power_identity(y)[(index, index)]
    }

    /// `<meas| T^y(1) |prep>`.
    pub fn expectation(&self, meas: &[f64], prep: &[f64], y: usize) -> f64 {
        let x = self.power_identity(y);
        let xp = x.mul_vec(prep);
        xp.iter().zip(meas).map(|(a, b)| a * b).sum()
    }

    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        eigenvalues(&self.matrix.to_complex())
    }
}
