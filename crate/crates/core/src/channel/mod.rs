//! CPTP channels on the qutrit register and their reductions to diagonal
//! (population) dynamics.

mod fidelity;
mod model;
mod tmap;
mod transition;

pub use fidelity::{
    average_fidelity_comp, average_fidelity_comp_exact, infidelity_comp_exact, tune_delta,
    FidelityEstimate, DEFAULT_FIDELITY_SAMPLES,
};
pub use model::{perturbed_channels, ErrorModel, GateErrors, Spam};
pub use tmap::{build_t_map, check_inputs as check_t_map_inputs, t_map_chunk, TMap, TMapVariant};
pub use transition::{
    born_matrix, restrict_to_diagonal, twirl, twirl_chunk, twirl_from_chunks, twirl_term,
    TransitionMatrix, Twirled, TWIRL_CHUNK,
};

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{eigenvalues, haar_unitary, ComplexMatrix};
use crate::register::{computational_indices, qubit_dim, qutrit_dim};
use crate::{tol, Error, Result, C64};

/// A CPTP map in Kraus form.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    kraus: Vec<ComplexMatrix>,
    label: String,
}

impl Channel {
    /// Validates shapes, finiteness and `sum_k K_k^dagger K_k = 1`.
    pub fn new(kraus: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| {
            Error::InvalidArgument("channel needs at least one Kraus operator".into())
        })?;
        let dim = first.require_square()?;
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for k in &kraus {
            if k.rows() != dim || k.cols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: k.rows(),
                });
            }
            if !k.is_finite() {
                return Err(Error::InvalidArgument(
                    "Kraus operator has non-finite entries".into(),
                ));
            }
            sum = &sum + &(&k.adjoint() * k);
        }
        let residual = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if residual > tol::STOCHASTIC {
            return Err(Error::NotCptp { residual });
        }
        Ok(Self {
            kraus,
            label: label.into(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![ComplexMatrix::identity(dim)],
            label: "identity".into(),
        }
    }

    /// `rho -> U rho U^dagger`.
    pub fn unitary(u: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        let residual = u.unitarity_residual();
        if residual > tol::UNITARY {
            return Err(Error::NotUnitary { residual });
        }
        Self::new(vec![u], label)
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].rows()
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn is_unitary(&self) -> bool {
        self.kraus.len() == 1
    }

    /// `sum_k K_k rho K_k^dagger`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.dim();
        if rho.rows() != d || rho.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rho.rows(),
            });
        }
        Ok(self.apply_unchecked(rho))
    }

    pub(crate) fn apply_unchecked(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut iter = self.kraus.iter();
        let mut out = rho.conjugate_by(iter.next().expect("non-empty"));
        for k in iter {
            out = &out + &rho.conjugate_by(k);
        }
        out
    }

    /// The channel `self o first` (apply `first`, then `self`).
    pub fn after(&self, first: &Channel) -> Channel {
        let mut kraus = Vec::with_capacity(self.kraus.len() * first.kraus.len());
        for a in &self.kraus {
            for b in &first.kraus {
                kraus.push(a * b);
            }
        }
        Channel {
            kraus,
            label: format!("{}*{}", self.label, first.label),
        }
    }

    /// Kraus operators `U^dagger K_k U`: the channel seen in the frame of `u`.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Channel {
        let ud = u.adjoint();
        Channel {
            kraus: self.kraus.iter().map(|k| &(&ud * k) * u).collect(),
            label: self.label.clone(),
        }
    }

    /// Superoperator `sum_k K_k (x) conj(K_k)` acting on row-major
    /// vectorized density matrices.
    pub fn superoperator(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut s = ComplexMatrix::zeros(d * d, d * d);
        for k in &self.kraus {
            s = &s + &k.kron(&k.conj());
        }
        s
    }

    /// `max |(sum_k K_k^dagger K_k - 1)_{ij}|`.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let mut sum = ComplexMatrix::zeros(d, d);
        for k in &self.kraus {
            sum = &sum + &(&k.adjoint() * k);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(d))
    }
}

/// Operator 2-norm of the difference of two superoperators, by power
/// iteration on `D^dagger D`.
pub fn channel_distance(a: &Channel, b: &Channel) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let diff = &a.superoperator() - &b.superoperator();
    let gram = &diff.adjoint() * &diff;
    let n = gram.rows();
    let mut v: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + i as f64 * 1e-3, 0.0))
        .collect();
    let mut estimate = 0.0;
    for _ in 0..500 {
        let w: Vec<C64> = (0..n)
            .map(|i| (0..n).map(|j| gram[(i, j)] * v[j]).sum())
            .collect();
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let next = norm / v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v = w.into_iter().map(|z| z / norm).collect();
        if (next - estimate).abs() <= 1e-13 * next {
            estimate = next;
            break;
        }
        estimate = next;
    }
    Ok(estimate.sqrt())
}

/// Gaussian Hermitian matrix `(G + G^dagger) / 2` scaled to unit spectral
/// norm.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ComplexMatrix> {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    let h = (&g + &g.adjoint()).scale(C64::new(0.5, 0.0));
    let norm = eigenvalues(&h)?
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if norm == 0.0 {
        return Err(Error::DegenerateFit(
            "random Hermitian matrix vanished".into(),
        ));
    }
    Ok(h.scale(C64::new(1.0 / norm, 0.0)))
}

/// Single Kraus operator `V exp(-i delta D) V^dagger` with `V` Haar random
/// and `D` real diagonal, entries uniform in `[-1, 1]` rescaled to unit
/// max-norm.
pub fn unitary_error<R: Rng + ?Sized>(dim: usize, delta: f64, rng: &mut R) -> Result<Channel> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut d: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let max = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max > 0.0 {
        d.iter_mut().for_each(|x| *x /= max);
    }
    let v = haar_unitary(dim, rng);
    let phases: Vec<C64> = d.iter().map(|&x| C64::new(0.0, -delta * x).exp()).collect();
    let u = &(&v * &ComplexMatrix::from_diag(&phases)) * &v.adjoint();
    Channel::new(vec![u], format!("unitary(delta={delta})"))
}

/// Kraus operators `K_k = <E_k| exp(-i delta H) |E_0>` for a random unit-norm
/// Hermitian `H` on system (x) environment (environment index fastest).
pub fn dilated_error<R: Rng + ?Sized>(
    sys_dim: usize,
    env_dim: usize,
    delta: f64,
    rng: &mut R,
) -> Result<Channel> {
    if env_dim < 2 || sys_dim == 0 {
        return Err(Error::InvalidArgument(format!(
            "dilation needs env_dim >= 2 and sys_dim >= 1, got {env_dim} and {sys_dim}"
        )));
    }
    let h = random_hermitian(sys_dim * env_dim, rng)?;
    let u = h.scale(C64::new(0.0, -delta)).expm()?;
    let kraus = (0..env_dim)
        .map(|k| ComplexMatrix::from_fn(sys_dim, sys_dim, |s, t| u[(s * env_dim + k, t * env_dim)]))
        .collect();
    Channel::new(kraus, format!("dilated(env={env_dim}, delta={delta})"))
}

/// Random-unitary mixture with Kraus operators `sqrt(1 - delta^2) 1` and
/// `delta V`, `V` Haar random on the full register. Unlike
/// [`unitary_error`] the deviation from the identity is incoherent.
pub fn stochastic_error<R: Rng + ?Sized>(dim: usize, delta: f64, rng: &mut R) -> Result<Channel> {
    if dim == 0 || !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidArgument(format!(
            "stochastic error needs dim >= 1 and delta in [0, 1], got {dim} and {delta}"
        )));
    }
    let v = haar_unitary(dim, rng);
    let k0 = ComplexMatrix::identity(dim).scale(C64::new((1.0 - delta * delta).sqrt(), 0.0));
    Channel::new(
        vec![k0, v.scale(C64::new(delta, 0.0))],
        format!("stochastic(delta={delta})"),
    )
}

/// Depolarizing noise of strength `p` on the computational subspace:
/// `rho_cc -> (1 - p) rho_cc + p Tr(rho_cc) 1/d`, leakage populations
/// untouched, comp-leak coherences damped by `sqrt(1 - p)`.
pub fn depolarizing_comp(n_qubits: usize, p: f64) -> Result<Channel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "depolarizing probability {p} outside [0, 1]"
        )));
    }
    let dim = qutrit_dim(n_qubits);
    let comp = computational_indices(n_qubits);
    let dc = qubit_dim(n_qubits);
    let mut k0 = ComplexMatrix::identity(dim);
    for &c in &comp {
        k0[(c, c)] = C64::new((1.0 - p).sqrt(), 0.0);
    }
    let mut kraus = vec![k0];
    if p > 0.0 {
        let amp = C64::new((p / dc as f64).sqrt(), 0.0);
        for &a in &comp {
            for &b in &comp {
                let mut k = ComplexMatrix::zeros(dim, dim);
                k[(a, b)] = amp;
                kraus.push(k);
            }
        }
    }
    Channel::new(kraus, format!("depolarizing(p={p})"))
}
