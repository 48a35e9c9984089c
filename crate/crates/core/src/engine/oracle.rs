use alloc::vec::Vec;

use crate::channel::{twirl, twirl_term, Channel, ErrorModel};
use crate::clifford::ExtendedCliffordSet;
use crate::linalg::{ComplexMatrix, RealMatrix};
use crate::register::computational_indices;
use crate::{Error, Result};

use super::{basis_density, finish, initial_index, SequenceOptions};

/// Largest number of sequences [`exhaustive_average`] enumerates (`48^3`).
pub const EXHAUSTIVE_LIMIT: u128 = 110_592;

/// Exact uniform average of the survival probability over every sequence
/// of length `y` (single-qubit sets only). Shot noise is ignored.
pub fn exhaustive_average(
    set: &ExtendedCliffordSet,
    model: &ErrorModel,
    y: usize,
    opts: &SequenceOptions,
) -> Result<f64> {
    let sequences = (set.len() as u128)
        .checked_pow(y as u32)
        .unwrap_or(u128::MAX);
    if set.n_qubits() != 1 || sequences > EXHAUSTIVE_LIMIT {
        return Err(Error::CombinatorialLimit { sequences });
    }
    model.check_covers(set)?;
    let index = initial_index(set, opts)?;
    let comp = computational_indices(set.n_qubits());
    let mut rho = basis_density(set.dim(), index);
    if let Some(spam) = model.spam() {
        rho = spam.prep.apply_unchecked(&rho);
    }
    let product = ComplexMatrix::identity(comp.len());
    let ctx = Ctx {
        set,
        model,
        opts,
        index,
        comp: &comp,
    };
    Ok(ctx.descend(y, &rho, &product) / sequences as f64)
}

struct Ctx<'a> {
    set: &'a ExtendedCliffordSet,
    model: &'a ErrorModel,
    opts: &'a SequenceOptions,
    index: usize,
    comp: &'a [usize],
}

impl Ctx<'_> {
    fn descend(&self, remaining: usize, rho: &ComplexMatrix, product: &ComplexMatrix) -> f64 {
        if remaining == 0 {
            return finish(
                rho.clone(),
                product,
                self.model,
                self.opts,
                self.index,
                self.comp,
            )
            .survival;
        }
        self.set
            .iter()
            .map(|e| {
                let next = self
                    .model
                    .gate_channel(e.clifford.id)
                    .apply_unchecked(&e.conjugate(rho));
                let p = e.clifford.gate.comp_block() * product;
                self.descend(remaining - 1, &next, &p)
            })
            .sum()
    }
}

/// Second-order survival variance
/// `sum_x avg_D (<i| M^(x-1) eps_D M^(y-x) |i>)^2` for every `y` in `ys`,
/// where `M` is the twirl and `eps_D` the population map of `D^dagger ch D`
/// minus `M`.
pub fn analytic_variance_curve(
    ch: &Channel,
    set: &ExtendedCliffordSet,
    ys: &[usize],
    initial_state: usize,
) -> Result<Vec<f64>> {
    if !set.twirl_design() {
        return Err(Error::InvalidArgument(
            "analytic variance requires a twirl-design set".into(),
        ));
    }
    let index = initial_index(
        set,
        &SequenceOptions {
            initial_state,
            ..SequenceOptions::default()
        },
    )?;
    let tw = twirl(ch, set)?.matrix.into_matrix();
    let d = set.dim();
    let eps: Vec<RealMatrix> = set
        .iter()
        .map(|e| {
            let mut t = twirl_term(ch, &e);
            for (a, b) in t.as_mut_slice().iter_mut().zip(tw.as_slice()) {
                *a -= b;
            }
            t
        })
        .collect();
    let y_max = ys.iter().copied().max().unwrap_or(0);
    let mut rows = Vec::with_capacity(y_max);
    let mut cols = Vec::with_capacity(y_max);
    let mut r = alloc::vec![0.0; d];
    r[index] = 1.0;
    let mut c = r.clone();
    for _ in 0..y_max {
        rows.push(r.clone());
        cols.push(c.clone());
        r = tw.vec_mul(&r);
        c = tw.mul_vec(&c);
    }
    let norm = 1.0 / eps.len() as f64;
    Ok(ys
        .iter()
        .map(|&y| {
            (1..=y)
                .map(|x| {
                    let (u, v) = (&rows[x - 1], &cols[y - x]);
                    eps.iter()
                        .map(|e| {
                            let ev = e.mul_vec(v);
                            let s: f64 = u.iter().zip(&ev).map(|(a, b)| a * b).sum();
                            s * s
                        })
                        .sum::<f64>()
                        * norm
                })
                .sum()
        })
        .collect())
}

pub fn analytic_variance(
    ch: &Channel,
    set: &ExtendedCliffordSet,
    y: usize,
    initial_state: usize,
) -> Result<f64> {
    Ok(analytic_variance_curve(ch, set, &[y], initial_state)?[0])
}
