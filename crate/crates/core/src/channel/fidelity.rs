use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::linalg::complex_gaussian;
use crate::register::{computational_indices, qubits_from_qutrit_dim};
use crate::{Error, Result, C64};

use super::Channel;

pub const DEFAULT_FIDELITY_SAMPLES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

fn comp_blocks(ch: &Channel) -> Result<(usize, Vec<usize>)> {
    let n = qubits_from_qutrit_dim(ch.dim()).ok_or(Error::DimensionMismatch {
        expected: 3,
        found: ch.dim(),
    })?;
    Ok((n, computational_indices(n)))
}

/// Average of `<psi| ch(|psi><psi|) |psi>` over Haar-random pure states of
/// the computational subspace, by sampling.
pub fn average_fidelity_comp<R: Rng + ?Sized>(
    ch: &Channel,
    samples: usize,
    rng: &mut R,
) -> Result<FidelityEstimate> {
    if samples < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            have: samples,
        });
    }
    let (_, comp) = comp_blocks(ch)?;
    let blocks: Vec<_> = ch.kraus().iter().map(|k| k.select(&comp, &comp)).collect();
    let dc = comp.len();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut psi = alloc::vec![C64::new(0.0, 0.0); dc];
    for _ in 0..samples {
        for z in psi.iter_mut() {
            *z = complex_gaussian(rng);
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        psi.iter_mut().for_each(|z| *z /= norm);
        let f: f64 = blocks
            .iter()
            .map(|a| {
                let mut amp = C64::new(0.0, 0.0);
                for i in 0..dc {
                    for j in 0..dc {
                        amp += psi[i].conj() * a[(i, j)] * psi[j];
                    }
                }
                amp.norm_sqr()
            })
            .sum();
        sum += f;
        sum_sq += f * f;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(FidelityEstimate {
        mean,
        stderr: (var / n).sqrt(),
        samples,
    })
}

/// Closed form `(sum_k |Tr A_k|^2 + sum_k Tr A_k^dagger A_k) / (d (d + 1))`
/// with `A_k` the computational blocks of the Kraus operators.
pub fn average_fidelity_comp_exact(ch: &Channel) -> f64 {
    let (_, comp) = comp_blocks(ch).expect("channel on a qutrit register");
    let d = comp.len() as f64;
    let mut total = 0.0;
    for k in ch.kraus() {
        let a = k.select(&comp, &comp);
        total += a.trace().norm_sqr();
        total += a.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    total / (d * (d + 1.0))
}

pub fn infidelity_comp_exact(ch: &Channel) -> f64 {
    1.0 - average_fidelity_comp_exact(ch)
}

/// Finds `delta` such that `build(delta)` has computational infidelity
/// `target`, assuming roughly quadratic growth for small `delta`. `build`
/// must be deterministic (reseed inside the closure).
pub fn tune_delta(
    target: f64,
    initial: f64,
    mut build: impl FnMut(f64) -> Result<Channel>,
) -> Result<(f64, Channel)> {
    if !(target > 0.0 && initial > 0.0) {
        return Err(Error::InvalidArgument(
            "target and initial delta must be positive".into(),
        ));
    }
    let mut delta = initial;
    for _ in 0..60 {
        let ch = build(delta)?;
        let inf = infidelity_comp_exact(&ch);
        if inf <= 0.0 {
            delta *= 2.0;
            continue;
        }
        if ((inf - target) / target).abs() < 1e-10 {
            return Ok((delta, ch));
        }
        delta *= (target / inf).sqrt();
    }
    Err(Error::DegenerateFit("delta tuning did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{depolarizing_comp, dilated_error, unitary_error};

    #[test]
    fn identity_has_unit_fidelity() {
        let mut rng = crate::rng_from_seed(1);
        let est = average_fidelity_comp(&Channel::identity(3), 1000, &mut rng).unwrap();
        assert!((est.mean - 1.0).abs() < 1e-14);
        assert!((average_fidelity_comp_exact(&Channel::identity(9)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn depolarizing_fidelity() {
        let p = 0.1;
        let ch = depolarizing_comp(1, p).unwrap();
        let mut rng = crate::rng_from_seed(2);
        let est = average_fidelity_comp(&ch, DEFAULT_FIDELITY_SAMPLES, &mut rng).unwrap();
        assert!((est.mean - (1.0 - p / 2.0)).abs() < 3.0 * est.stderr + 1e-12);
        assert!((average_fidelity_comp_exact(&ch) - (1.0 - p / 2.0)).abs() < 1e-14);
    }

    #[test]
    fn sampled_matches_closed_form() {
        let mut rng = crate::rng_from_seed(3);
        let ch = unitary_error(3, 0.05, &mut rng).unwrap();
        let est = average_fidelity_comp(&ch, DEFAULT_FIDELITY_SAMPLES, &mut rng).unwrap();
        let exact = average_fidelity_comp_exact(&ch);
        assert!(
            (est.mean - exact).abs() < 3.0 * est.stderr,
            "{} vs {exact}",
            est.mean
        );
        let ch2 = dilated_error(9, 2, 0.3, &mut rng).unwrap();
        let est2 = average_fidelity_comp(&ch2, 20_000, &mut rng).unwrap();
        assert!((est2.mean - average_fidelity_comp_exact(&ch2)).abs() < 3.0 * est2.stderr);
    }

    #[test]
    fn infidelity_is_quadratic_in_delta() {
        let deltas = [1e-3, 1e-2, 1e-1];
        let infs: Vec<f64> = deltas
            .iter()
            .map(|&d| {
                let mut rng = crate::rng_from_seed(4);
                infidelity_comp_exact(&unitary_error(3, d, &mut rng).unwrap())
            })
            .collect();
        let slope = (infs[2] / infs[0]).ln() / (deltas[2] / deltas[0]).ln();
        assert!((slope - 2.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn tuning_hits_target() {
        let (delta, ch) = tune_delta(1.354e-3, 0.05, |d| {
            let mut rng = crate::rng_from_seed(5);
            unitary_error(9, d, &mut rng)
        })
        .unwrap();
        assert!(delta > 0.0);
        assert!((infidelity_comp_exact(&ch) - 1.354e-3).abs() < 1e-12);
    }
}
