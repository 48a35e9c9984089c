//! Bootstrap over sequences: each replicate resamples, with replacement,
//! the per-sequence survivals within every length and refits at a fixed
//! order.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::{error_per_gate, fit_decay_order, DecayFit, DecaySample};
use crate::engine::{derive_seed, summary_of};
use crate::{rng_from_seed, Error, Result};

/// Per-sequence survival values at one length.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceGroup {
    pub y: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    /// Central `level` percentile interval (linear interpolation).
    pub fn percentile(values: &mut [f64], level: f64) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        let q = |p: f64| {
            let x = p * (values.len() - 1) as f64;
            let (i, f) = (x.floor() as usize, x - x.floor());
            let j = (i + 1).min(values.len() - 1);
            values[i] * (1.0 - f) + values[j] * f
        };
        let tail = 0.5 * (1.0 - level);
        Some(Self {
            lo: q(tail),
            hi: q(1.0 - tail),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapSummary {
    pub replicates: usize,
    /// Replicates whose fit failed or whose mode structure differed from
    /// the majority.
    pub rejected: usize,
    pub error_per_gate: Option<Interval>,
    /// Per mode position (canonical order) intervals of `Re lambda` and
    /// `Im lambda`.
    pub lambda_re: Vec<Interval>,
    pub lambda_im: Vec<Interval>,
}

pub fn samples_from_groups(groups: &[SequenceGroup]) -> Result<Vec<DecaySample>> {
    groups
        .iter()
        .map(|g| {
            let s = summary_of(g.y, &g.values);
            DecaySample::new(g.y, s.mean, s.stderr, s.count)
        })
        .collect()
}

/// One bootstrap replicate, seeded by `(seed, replicate)` alone so
/// replicates can be evaluated in any order.
pub fn bootstrap_replicate(
    groups: &[SequenceGroup],
    order: usize,
    seed: u64,
    replicate: usize,
) -> Result<DecayFit> {
    let mut rng = rng_from_seed(derive_seed(seed, 0, replicate));
    let resampled: Vec<SequenceGroup> = groups
        .iter()
        .map(|g| {
            if g.values.is_empty() {
                return Err(Error::TooFewSamples { needed: 1, have: 0 });
            }
            Ok(SequenceGroup {
                y: g.y,
                values: (0..g.values.len())
                    .map(|_| g.values[rng.random_range(0..g.values.len())])
                    .collect(),
            })
        })
        .collect::<Result<_>>()?;
    fit_decay_order(&samples_from_groups(&resampled)?, order)
}

impl BootstrapSummary {
    /// 95% percentile intervals over the replicates that share the most
    /// common mode structure.
    pub fn from_fits(fits: &[Result<DecayFit>]) -> Self {
        let signature =
            |f: &DecayFit| -> Vec<bool> { f.modes.iter().map(|m| m.lambda.im != 0.0).collect() };
        let ok: Vec<&DecayFit> = fits.iter().filter_map(|f| f.as_ref().ok()).collect();
        let mut best: Option<(Vec<bool>, usize)> = None;
        for f in &ok {
            let sig = signature(f);
            let count = ok.iter().filter(|g| signature(g) == sig).count();
            if best.as_ref().is_none_or(|b| count > b.1) {
                best = Some((sig, count));
            }
        }
        let Some((sig, _)) = best else {
            return Self {
                replicates: fits.len(),
                rejected: fits.len(),
                error_per_gate: None,
                lambda_re: Vec::new(),
                lambda_im: Vec::new(),
            };
        };
        let kept: Vec<&DecayFit> = ok.into_iter().filter(|f| signature(f) == sig).collect();
        let mut eps: Vec<f64> = kept.iter().filter_map(|f| error_per_gate(f).ok()).collect();
        let mut lambda_re = Vec::new();
        let mut lambda_im = Vec::new();
        for i in 0..sig.len() {
            let mut re: Vec<f64> = kept.iter().map(|f| f.modes[i].lambda.re).collect();
            let mut im: Vec<f64> = kept.iter().map(|f| f.modes[i].lambda.im).collect();
            lambda_re.extend(Interval::percentile(&mut re, 0.95));
            lambda_im.extend(Interval::percentile(&mut im, 0.95));
        }
        Self {
            replicates: fits.len(),
            rejected: fits.len() - kept.len(),
            error_per_gate: Interval::percentile(&mut eps, 0.95),
            lambda_re,
            lambda_im,
        }
    }
}

/// Serial bootstrap with `replicates` resamples.
pub fn bootstrap(
    groups: &[SequenceGroup],
    order: usize,
    replicates: usize,
    seed: u64,
) -> BootstrapSummary {
    let fits: Vec<Result<DecayFit>> = (0..replicates)
        .map(|r| bootstrap_replicate(groups, order, seed, r))
        .collect();
    BootstrapSummary::from_fits(&fits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn groups(seed: u64) -> Vec<SequenceGroup> {
        let mut rng = rng_from_seed(seed);
        (1..=12)
            .map(|k| {
                let y = 10 * k;
                let mean = 0.5 + 0.45 * 0.98f64.powi(y as i32);
                SequenceGroup {
                    y,
                    values: (0..30)
                        .map(|_| mean + 0.01 * (rng.random::<f64>() - 0.5))
                        .collect(),
                }
            })
            .collect()
    }

    #[test]
    fn percentile_interval() {
        let mut v: Vec<f64> = (0..=100).map(|x| x as f64).collect();
        let i = Interval::percentile(&mut v, 0.95).unwrap();
        assert!((i.lo - 2.5).abs() < 1e-12 && (i.hi - 97.5).abs() < 1e-12);
        assert!(Interval::percentile(&mut [], 0.9).is_none());
    }

    #[test]
    fn intervals_cover_the_truth() {
        let g = groups(1);
        let s = bootstrap(&g, 2, 200, 7);
        assert_eq!(s.replicates, 200);
        assert!(s.rejected < 20);
        assert_eq!(s.lambda_re.len(), 2);
        assert!(s.lambda_re[1].lo < 0.98 && 0.98 < s.lambda_re[1].hi);
        let eps = s.error_per_gate.unwrap();
        let want = 0.009 / 0.95;
        assert!(eps.lo < want && want < eps.hi, "{eps:?}");
    }

    #[test]
    fn replicates_are_reproducible() {
        let g = groups(2);
        assert_eq!(
            bootstrap_replicate(&g, 2, 3, 5),
            bootstrap_replicate(&g, 2, 3, 5)
        );
        assert_ne!(
            bootstrap_replicate(&g, 2, 3, 5),
            bootstrap_replicate(&g, 2, 3, 6)
        );
        let empty = vec![SequenceGroup {
            y: 1,
            values: vec![],
        }];
        assert!(bootstrap_replicate(&empty, 1, 0, 0).is_err());
    }
}
