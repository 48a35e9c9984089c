//! Simulation of the randomized benchmarking protocol on full density
//! matrices, plus exact oracles.

mod oracle;

pub use oracle::{
    analytic_variance, analytic_variance_curve, exhaustive_average, EXHAUSTIVE_LIMIT,
};

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::channel::{Channel, ErrorModel};
use crate::clifford::{comp_inverse, ExtendedCliffordSet, QutritUnitary};
use crate::linalg::ComplexMatrix;
use crate::register::computational_indices;
use crate::{Error, Result, C64};

/// Per-sequence simulation switches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SequenceOptions {
    /// Finite-shot estimate instead of the exact expectation.
    pub shots: Option<u64>,
    /// Skip the error channel after the inverting gate.
    pub ideal_inverter: bool,
    /// Computational basis index (qubit ordering) of the initial state.
    pub initial_state: usize,
}

/// A fixed gate and its error inserted after every random element.
#[derive(Clone, Copy, Debug)]
pub struct Interleave<'a> {
    pub gate: &'a QutritUnitary,
    pub error: &'a Channel,
}

/// Survival and computational-subspace population at the end of one
/// sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub survival: f64,
    pub comp_population: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SequenceResult {
    pub y: usize,
    pub sequence_index: usize,
    pub survival: f64,
    pub comp_population: f64,
    pub seed: u64,
}

/// Register index of the initial state, validated against the set.
pub fn initial_index(set: &ExtendedCliffordSet, opts: &SequenceOptions) -> Result<usize> {
    computational_indices(set.n_qubits())
        .get(opts.initial_state)
        .copied()
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "initial state {} outside the computational subspace",
                opts.initial_state
            ))
        })
}

pub(crate) fn basis_density(dim: usize, index: usize) -> ComplexMatrix {
    let mut rho = ComplexMatrix::zeros(dim, dim);
    rho[(index, index)] = C64::new(1.0, 0.0);
    rho
}

/// Applies the inverter, its error and measurement error, and reads out.
pub(crate) fn finish(
    rho: ComplexMatrix,
    comp_product: &ComplexMatrix,
    model: &ErrorModel,
    opts: &SequenceOptions,
    index: usize,
    comp: &[usize],
) -> Outcome {
    let mut rho = rho.conjugate_by(comp_inverse(comp_product).full());
    if !opts.ideal_inverter {
        rho = model.inverter_channel().apply_unchecked(&rho);
    }
    if let Some(spam) = model.spam() {
        rho = spam.meas.apply_unchecked(&rho);
    }
    let comp_population: f64 = comp
        .iter()
        .map(|&c| rho[(c, c)].re)
        .sum::<f64>()
        .clamp(0.0, 1.0);
    let survival = rho[(index, index)].re.clamp(0.0, comp_population);
    Outcome {
        survival,
        comp_population,
    }
}

/// Draws `y` elements, applies gate then error for each (and the
/// interleaved gate if given), inverts on the computational subspace and
/// measures the overlap with the initial state.
pub fn run_sequence<R: Rng + ?Sized>(
    set: &ExtendedCliffordSet,
    model: &ErrorModel,
    y: usize,
    rng: &mut R,
    opts: &SequenceOptions,
    interleave: Option<Interleave<'_>>,
) -> Result<Outcome> {
    model.check_covers(set)?;
    if let Some(il) = interleave {
        if il.gate.dim() != set.dim() || il.error.dim() != set.dim() {
            return Err(Error::DimensionMismatch {
                expected: set.dim(),
                found: il.gate.dim().max(il.error.dim()),
            });
        }
    }
    let index = initial_index(set, opts)?;
    let comp = computational_indices(set.n_qubits());
    let mut rho = basis_density(set.dim(), index);
    if let Some(spam) = model.spam() {
        rho = spam.prep.apply_unchecked(&rho);
    }
    let mut product = ComplexMatrix::identity(comp.len());
    for _ in 0..y {
        let e = set.sample_element(rng);
        rho = e.conjugate(&rho);
        rho = model.gate_channel(e.clifford.id).apply_unchecked(&rho);
        product = e.clifford.gate.comp_block() * &product;
        if let Some(il) = interleave {
            rho = il.error.apply_unchecked(&rho);
            rho = rho.conjugate_by(il.gate.full());
            product = il.gate.comp_block() * &product;
        }
    }
    let exact = finish(rho, &product, model, opts, index, &comp);
    Ok(match opts.shots {
        Some(shots) => sample_shots(exact, shots, rng)?,
        None => exact,
    })
}

fn sample_shots<R: Rng + ?Sized>(exact: Outcome, shots: u64, rng: &mut R) -> Result<Outcome> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    let binom = |n: u64, p: f64, rng: &mut R| -> Result<u64> {
        if n == 0 {
            return Ok(0);
        }
        Binomial::new(n, p.clamp(0.0, 1.0))
            .map(|b| b.sample(rng))
            .map_err(|e| Error::InvalidArgument(format!("binomial sampling: {e}")))
    };
    let n0 = binom(shots, exact.survival, rng)?;
    let rest = 1.0 - exact.survival;
    let p_other = if rest > 0.0 {
        (exact.comp_population - exact.survival) / rest
    } else {
        0.0
    };
    let n1 = binom(shots - n0, p_other, rng)?;
    let s = shots as f64;
    Ok(Outcome {
        survival: n0 as f64 / s,
        comp_population: (n0 + n1) as f64 / s,
    })
}

/// Stable 64-bit mixing of `(master_seed, y, index)` (SplitMix64 finalizer
/// applied to each word in turn).
pub fn derive_seed(master_seed: u64, y: usize, index: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(mix(master_seed) ^ y as u64) ^ index as u64)
}

/// Master seed of the interleaved half of an IRB run.
pub fn interleaved_master_seed(master_seed: u64) -> u64 {
    derive_seed(master_seed, usize::MAX, usize::MAX)
}

/// Sequence lengths, repetitions and seeding for a protocol run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolSpec {
    pub lengths: Vec<usize>,
    pub sequences_per_length: usize,
    pub master_seed: u64,
    pub options: SequenceOptions,
}

impl ProtocolSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() {
            return Err(Error::InvalidArgument("no sequence lengths".into()));
        }
        if self.lengths[0] < 1 || self.lengths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "sequence lengths must be >= 1 and strictly increasing".into(),
            ));
        }
        if self.sequences_per_length == 0 {
            return Err(Error::InvalidArgument(
                "sequences_per_length must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// All `(y, index)` work items in output order.
    pub fn work_items(&self) -> Vec<(usize, usize)> {
        self.lengths
            .iter()
            .flat_map(|&y| (0..self.sequences_per_length).map(move |k| (y, k)))
            .collect()
    }
}

/// Runs the single sequence keyed by `(y, index)` with its derived seed.
pub fn run_keyed(
    set: &ExtendedCliffordSet,
    model: &ErrorModel,
    spec: &ProtocolSpec,
    y: usize,
    index: usize,
    interleave: Option<Interleave<'_>>,
) -> Result<SequenceResult> {
    let seed = derive_seed(spec.master_seed, y, index);
    let mut rng = crate::rng_from_seed(seed);
    let out = run_sequence(set, model, y, &mut rng, &spec.options, interleave)?;
    Ok(SequenceResult {
        y,
        sequence_index: index,
        survival: out.survival,
        comp_population: out.comp_population,
        seed,
    })
}

/// Runs every sequence of the protocol, ordered by `(y, index)`.
pub fn run_protocol(
    set: &ExtendedCliffordSet,
    model: &ErrorModel,
    spec: &ProtocolSpec,
    interleave: Option<Interleave<'_>>,
) -> Result<Vec<SequenceResult>> {
    spec.validate()?;
    spec.work_items()
        .into_iter()
        .map(|(y, k)| run_keyed(set, model, spec, y, k, interleave))
        .collect()
}

/// Reference and interleaved runs; the interleaved half uses the master
/// seed [`interleaved_master_seed`].
pub fn run_irb(
    set: &ExtendedCliffordSet,
    model: &ErrorModel,
    spec: &ProtocolSpec,
    gate: &QutritUnitary,
    error: &Channel,
) -> Result<(Vec<SequenceResult>, Vec<SequenceResult>)> {
    let reference = run_protocol(set, model, spec, None)?;
    let spec_i = ProtocolSpec {
        master_seed: interleaved_master_seed(spec.master_seed),
        ..spec.clone()
    };
    let interleaved = run_protocol(set, model, &spec_i, Some(Interleave { gate, error }))?;
    Ok((reference, interleaved))
}

/// Mean, spread and count of one quantity at one sequence length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LengthSummary {
    pub y: usize,
    pub mean: f64,
    /// Unbiased sample variance (0 when `count == 1`).
    pub variance: f64,
    pub stderr: f64,
    pub count: usize,
}

impl LengthSummary {
    /// A single sample carries no spread information.
    pub fn degenerate(&self) -> bool {
        self.count < 2
    }
}

/// Per-length statistics of the survival probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceCurve {
    pub points: Vec<LengthSummary>,
}

impl VarianceCurve {
    pub fn ys(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.y).collect()
    }

    pub fn any_degenerate(&self) -> bool {
        self.points.iter().any(LengthSummary::degenerate)
    }
}

/// Groups results by `y` (first-appearance order) and summarizes `value`.
pub fn summarize_by(
    results: &[SequenceResult],
    value: impl Fn(&SequenceResult) -> f64,
) -> VarianceCurve {
    let mut ys: Vec<usize> = Vec::new();
    for r in results {
        if !ys.contains(&r.y) {
            ys.push(r.y);
        }
    }
    let points = ys
        .into_iter()
        .map(|y| {
            let vals: Vec<f64> = results.iter().filter(|r| r.y == y).map(&value).collect();
            summary_of(y, &vals)
        })
        .collect();
    VarianceCurve { points }
}

/// Survival statistics per length.
pub fn summarize(results: &[SequenceResult]) -> VarianceCurve {
    summarize_by(results, |r| r.survival)
}

pub fn summary_of(y: usize, vals: &[f64]) -> LengthSummary {
    let n = vals.len();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    LengthSummary {
        y,
        mean,
        variance,
        stderr: (variance / n as f64).sqrt(),
        count: n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{twirl, unitary_error};
    use crate::clifford::{
        build_extended_set, embed_qutrit, EntanglerVariant, LeakageAction, LeakagePolicy,
    };

    fn set1() -> ExtendedCliffordSet {
        build_extended_set(1, LeakagePolicy::Identity, EntanglerVariant::Diagonal).unwrap()
    }

    #[test]
    fn error_free_survival_is_one() {
        let set = set1();
        let model = ErrorModel::error_free(3);
        let mut rng = crate::rng_from_seed(1);
        for y in [1, 5, 50] {
            let out =
                run_sequence(&set, &model, y, &mut rng, &SequenceOptions::default(), None).unwrap();
            assert!((out.survival - 1.0).abs() < 1e-10);
            assert!((out.comp_population - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn single_sequence_protocol() {
        let spec = ProtocolSpec {
            lengths: alloc::vec![1],
            sequences_per_length: 1,
            master_seed: 3,
            options: SequenceOptions::default(),
        };
        let res = run_protocol(&set1(), &ErrorModel::error_free(3), &spec, None).unwrap();
        assert_eq!(res.len(), 1);
        assert!((res[0].survival - 1.0).abs() < 1e-10);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = ProtocolSpec {
            lengths: alloc::vec![2, 2],
            sequences_per_length: 1,
            master_seed: 0,
            options: SequenceOptions::default(),
        };
        assert!(spec.validate().is_err());
        spec.lengths = alloc::vec![0, 2];
        assert!(spec.validate().is_err());
        spec.lengths = alloc::vec![1, 2];
        spec.sequences_per_length = 0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
        assert_ne!(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
        assert_ne!(derive_seed(1, 2, 3), derive_seed(2, 2, 3));
    }

    #[test]
    fn protocol_is_deterministic() {
        let mut rng = crate::rng_from_seed(4);
        let model = ErrorModel::gate_independent(unitary_error(3, 0.1, &mut rng).unwrap());
        let spec = ProtocolSpec {
            lengths: alloc::vec![1, 3, 5],
            sequences_per_length: 4,
            master_seed: 77,
            options: SequenceOptions::default(),
        };
        let a = run_protocol(&set1(), &model, &spec, None).unwrap();
        let b = run_protocol(&set1(), &model, &spec, None).unwrap();
        assert_eq!(a, b);
        let one = run_keyed(&set1(), &model, &spec, 3, 2, None).unwrap();
        assert_eq!(one, a[4 + 2]);
    }

    #[test]
    fn probabilities_are_ordered() {
        let mut rng = crate::rng_from_seed(5);
        let model = ErrorModel::gate_independent(unitary_error(3, 0.3, &mut rng).unwrap());
        for _ in 0..50 {
            let out = run_sequence(
                &set1(),
                &model,
                10,
                &mut rng,
                &SequenceOptions::default(),
                None,
            )
            .unwrap();
            assert!(out.survival >= 0.0 && out.survival <= out.comp_population);
            assert!(out.comp_population <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn shot_estimates_converge() {
        let mut rng = crate::rng_from_seed(6);
        let model = ErrorModel::gate_independent(unitary_error(3, 0.3, &mut rng).unwrap());
        let set = set1();
        let exact_opts = SequenceOptions::default();
        let shot_opts = SequenceOptions {
            shots: Some(1_000_000),
            ..exact_opts
        };
        let exact = run_sequence(
            &set,
            &model,
            20,
            &mut crate::rng_from_seed(9),
            &exact_opts,
            None,
        )
        .unwrap();
        let shot = run_sequence(
            &set,
            &model,
            20,
            &mut crate::rng_from_seed(9),
            &shot_opts,
            None,
        )
        .unwrap();
        let sigma = (exact.survival * (1.0 - exact.survival) / 1e6).sqrt();
        assert!((shot.survival - exact.survival).abs() < 3.0 * sigma + 1e-12);
        assert!(shot.survival <= shot.comp_population);
    }

    #[test]
    fn mean_survival_follows_twirl() {
        let set = set1();
        let mut rng = crate::rng_from_seed(7);
        let ch = unitary_error(3, 0.15, &mut rng).unwrap();
        let tw = twirl(&ch, &set).unwrap().matrix;
        let model = ErrorModel::gate_independent(ch);
        let spec = ProtocolSpec {
            lengths: alloc::vec![5, 10, 20, 40],
            sequences_per_length: 40,
            master_seed: 11,
            options: SequenceOptions {
                ideal_inverter: true,
                ..SequenceOptions::default()
            },
        };
        let curve = summarize(&run_protocol(&set, &model, &spec, None).unwrap());
        for p in &curve.points {
            let predicted = tw.survival(0, p.y);
            assert!(
                (p.mean - predicted).abs() < 3.0 * p.stderr,
                "y={} {} vs {}",
                p.y,
                p.mean,
                predicted
            );
        }
    }

    #[test]
    fn interleaved_identity_keeps_survival_one() {
        let set = set1();
        let id = embed_qutrit(&ComplexMatrix::identity(2), &LeakageAction::Identity).unwrap();
        let spec = ProtocolSpec {
            lengths: alloc::vec![1, 2],
            sequences_per_length: 2,
            master_seed: 1,
            options: SequenceOptions::default(),
        };
        let (r, i) = run_irb(
            &set,
            &ErrorModel::error_free(3),
            &spec,
            &id,
            &Channel::identity(3),
        )
        .unwrap();
        assert!(r.iter().chain(&i).all(|x| (x.survival - 1.0).abs() < 1e-10));
    }

    #[test]
    fn summaries() {
        let s = summary_of(3, &[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.variance, 1.0);
        assert!(!s.degenerate());
        assert!(summary_of(1, &[0.5]).degenerate());
    }
}
