//! Multi-exponential decay fitting `phi(y) = sum_i a_i lambda_i^y` and the
//! error estimates derived from it.
//!
//! Poles are initialized by a matrix pencil on the uniformly spaced `y`
//! grid and refined together with the amplitudes by weighted, projected
//! Levenberg-Marquardt (`|lambda| <= 1`). Complex poles are parametrized as
//! conjugate pairs so the model stays real. The order is chosen by BIC
//! among fits whose modes are resolved by the grid.

mod bootstrap;
mod lm;
mod pencil;
mod shape;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::engine::LengthSummary;
use crate::linalg::{lstsq, RealMatrix};
use crate::{tol, Error, Result, C64};

pub use bootstrap::{
    bootstrap, bootstrap_replicate, samples_from_groups, BootstrapSummary, Interval, SequenceGroup,
};
pub use lm::{levenberg_marquardt, LmOptions, LmOutcome};
pub use pencil::{matrix_pencil, RANK_TOLERANCE};
pub use shape::{fit_variance_shape, VarianceShape};

/// Mean survival at one sequence length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecaySample {
    pub y: usize,
    pub phi_mean: f64,
    pub phi_stderr: f64,
    /// Number of sequences averaged.
    pub k: usize,
}

impl DecaySample {
    pub fn new(y: usize, phi_mean: f64, phi_stderr: f64, k: usize) -> Result<Self> {
        if !(phi_stderr >= 0.0 && phi_stderr.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "stderr {phi_stderr} at y = {y}"
            )));
        }
        if !(0.0..=1.0 + tol::FIT).contains(&phi_mean) {
            return Err(Error::InvalidArgument(format!(
                "mean {phi_mean} at y = {y} outside [0, 1]"
            )));
        }
        Ok(Self {
            y,
            phi_mean,
            phi_stderr,
            k,
        })
    }

    pub fn from_summary(s: &LengthSummary) -> Result<Self> {
        Self::new(s.y, s.mean, s.stderr, s.count)
    }
}

/// One term `a lambda^y` of the model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub a: C64,
    pub lambda: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    /// Sorted by descending `|lambda|`; conjugate partners are adjacent with
    /// the positive imaginary part first.
    pub modes: Vec<Mode>,
    /// Unweighted root-mean-square residual.
    pub residual_rms: f64,
    /// Number of modes, conjugate partners counted separately.
    pub model_order: usize,
    pub unit_mode_present: bool,
    pub bic: f64,
    /// Whether residuals were weighted by `1 / stderr`.
    pub weighted: bool,
    pub diagnostic: Option<String>,
}

impl DecayFit {
    pub fn predict(&self, y: usize) -> f64 {
        self.modes
            .iter()
            .map(|m| (m.a * m.lambda.powi(y as i32)).re)
            .sum()
    }

    /// Number of real parameters.
    pub fn parameter_count(&self) -> usize {
        2 * self.model_order
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Term {
    /// `a lambda^y`, parameters `(a, lambda)`.
    Real,
    /// `2 Re(a lambda^y)`, parameters `(Re a, Im a, |lambda|, arg lambda)`.
    Pair,
}

impl Term {
    fn width(self) -> usize {
        match self {
            Term::Real => 2,
            Term::Pair => 4,
        }
    }
}

/// Poles with imaginary part below this fraction of their modulus are
/// treated as real.
const IMAG_TOLERANCE: f64 = 1e-9;
/// Floor on `RSS / n` in the unweighted criterion, so exact fits of
/// different orders compare by their parameter count.
const RSS_FLOOR: f64 = 1e-24;

struct Problem {
    ys: Vec<usize>,
    phi: Vec<f64>,
    weights: Vec<f64>,
    weighted: bool,
    step: usize,
}

impl Problem {
    fn new(samples: &[DecaySample]) -> Result<Self> {
        let mut sorted = samples.to_vec();
        sorted.sort_by_key(|s| s.y);
        if sorted.len() < 2 {
            return Err(Error::TooFewSamples {
                needed: 3,
                have: sorted.len(),
            });
        }
        let step = sorted[1].y - sorted[0].y;
        if step == 0 || sorted.windows(2).any(|w| w[1].y - w[0].y != step) {
            return Err(Error::NonUniformSpacing);
        }
        let weighted = sorted.iter().all(|s| s.phi_stderr > 0.0 && s.k > 1);
        let weights = sorted
            .iter()
            .map(|s| if weighted { 1.0 / s.phi_stderr } else { 1.0 })
            .collect();
        Ok(Self {
            ys: sorted.iter().map(|s| s.y).collect(),
            phi: sorted.iter().map(|s| s.phi_mean).collect(),
            weights,
            weighted,
            step,
        })
    }

    fn n(&self) -> usize {
        self.ys.len()
    }
}

fn term_value(term: Term, p: &[f64], y: usize) -> f64 {
    match term {
        Term::Real => p[0] * p[1].powi(y as i32),
        Term::Pair => {
            let w = C64::from_polar(p[2].powi(y as i32), p[3] * y as f64);
            2.0 * (C64::new(p[0], p[1]) * w).re
        }
    }
}

fn term_gradient(term: Term, p: &[f64], y: usize, out: &mut [f64]) {
    let yi = y as i32;
    match term {
        Term::Real => {
            out[0] = p[1].powi(yi);
            out[1] = if y == 0 {
                0.0
            } else {
                p[0] * y as f64 * p[1].powi(yi - 1)
            };
        }
        Term::Pair => {
            let a = C64::new(p[0], p[1]);
            let phase = C64::from_polar(1.0, p[3] * y as f64);
            let w = phase * p[2].powi(yi);
            out[0] = 2.0 * w.re;
            out[1] = -2.0 * w.im;
            out[2] = if y == 0 {
                0.0
            } else {
                2.0 * (a * phase * (y as f64 * p[2].powi(yi - 1))).re
            };
            out[3] = 2.0 * (a * C64::new(0.0, y as f64) * w).re;
        }
    }
}

fn project(terms: &[Term], p: &mut [f64]) {
    let mut at = 0;
    for &t in terms {
        match t {
            Term::Real => p[at + 1] = p[at + 1].clamp(-1.0, 1.0),
            Term::Pair => p[at + 2] = p[at + 2].clamp(0.0, 1.0),
        }
        at += t.width();
    }
}

/// Parameter count for the information criterion. The angle of a complex
/// pair counts three times: frequencies are resolved at rate `n^(-3/2)`,
/// and without the heavier penalty noise is routinely fitted by slowly
/// damped oscillations.
fn penalty_weight(terms: &[Term]) -> f64 {
    terms
        .iter()
        .map(|t| match t {
            Term::Real => 2.0,
            Term::Pair => 6.0,
        })
        .sum()
}

fn model_value(terms: &[Term], p: &[f64], y: usize) -> f64 {
    let mut at = 0;
    let mut v = 0.0;
    for &t in terms {
        v += term_value(t, &p[at..at + t.width()], y);
        at += t.width();
    }
    v
}

/// Converts pencil poles (per grid step) to per-gate poles.
fn poles_to_terms(z: &[C64], step: usize) -> (Vec<Term>, Vec<C64>) {
    let inv = 1.0 / step as f64;
    let mut terms = Vec::new();
    let mut lambdas = Vec::new();
    for v in z {
        let r = v.norm().powf(inv).min(1.0);
        if v.im.abs() <= IMAG_TOLERANCE * v.norm() {
            let sign = if v.re < 0.0 && step % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            terms.push(Term::Real);
            lambdas.push(C64::new(sign * r, 0.0));
        } else if v.im > 0.0 {
            terms.push(Term::Pair);
            lambdas.push(C64::from_polar(r, v.arg() * inv));
        }
    }
    (terms, lambdas)
}

/// Weighted linear least squares for the amplitudes at fixed poles.
fn amplitudes(prob: &Problem, terms: &[Term], lambdas: &[C64]) -> Result<Vec<f64>> {
    let cols: usize = terms
        .iter()
        .map(|t| if *t == Term::Real { 1 } else { 2 })
        .sum();
    let n = prob.n();
    let mut a = RealMatrix::zeros(n, cols);
    for (row, &y) in prob.ys.iter().enumerate() {
        let w = prob.weights[row];
        let mut c = 0;
        for (t, l) in terms.iter().zip(lambdas) {
            let v = l.powi(y as i32);
            match t {
                Term::Real => {
                    a[(row, c)] = w * v.re;
                    c += 1;
                }
                Term::Pair => {
                    a[(row, c)] = 2.0 * w * v.re;
                    a[(row, c + 1)] = -2.0 * w * v.im;
                    c += 2;
                }
            }
        }
    }
    let b = RealMatrix::from_fn(n, 1, |i, _| prob.weights[i] * prob.phi[i]);
    let x = lstsq(&a, &b, 1e-13)?;
    let mut params = Vec::new();
    let mut c = 0;
    for (t, l) in terms.iter().zip(lambdas) {
        match t {
            Term::Real => {
                params.extend_from_slice(&[x[(c, 0)], l.re]);
                c += 1;
            }
            Term::Pair => {
                params.extend_from_slice(&[x[(c, 0)], x[(c + 1, 0)], l.norm(), l.arg()]);
                c += 2;
            }
        }
    }
    Ok(params)
}

fn refine(prob: &Problem, terms: &[Term], initial: &[f64]) -> Vec<f64> {
    let n = prob.n();
    let widths: Vec<usize> = terms.iter().map(|t| t.width()).collect();
    let mut grad = [0.0; 4];
    let out = levenberg_marquardt(
        initial,
        n,
        |p, r, jac| {
            for (row, &y) in prob.ys.iter().enumerate() {
                let w = prob.weights[row];
                let mut at = 0;
                let mut v = 0.0;
                for (&t, &width) in terms.iter().zip(&widths) {
                    let tp = &p[at..at + width];
                    v += term_value(t, tp, y);
                    term_gradient(t, tp, y, &mut grad);
                    for k in 0..width {
                        jac[(row, at + k)] = w * grad[k];
                    }
                    at += width;
                }
                r[row] = w * (v - prob.phi[row]);
            }
        },
        |p| project(terms, p),
        &LmOptions::default(),
    );
    out.params
}

fn assemble(
    prob: &Problem,
    terms: &[Term],
    p: &[f64],
    diagnostic: Option<String>,
) -> Result<DecayFit> {
    if p.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateFit("non-finite parameters".into()));
    }
    let mut modes = Vec::new();
    let mut at = 0;
    for &t in terms {
        let q = &p[at..at + t.width()];
        match t {
            Term::Real => modes.push(Mode {
                a: C64::new(q[0], 0.0),
                lambda: C64::new(q[1], 0.0),
            }),
            Term::Pair => {
                let a = C64::new(q[0], q[1]);
                let l = C64::from_polar(q[2], q[3]);
                let (a, l) = if l.im < 0.0 {
                    (a.conj(), l.conj())
                } else {
                    (a, l)
                };
                modes.push(Mode { a, lambda: l });
                modes.push(Mode {
                    a: a.conj(),
                    lambda: l.conj(),
                });
            }
        }
        at += t.width();
    }
    sort_modes(&mut modes);
    let n = prob.n() as f64;
    let (mut rss, mut chi2) = (0.0, 0.0);
    for (i, &y) in prob.ys.iter().enumerate() {
        let r = model_value(terms, p, y) - prob.phi[i];
        rss += r * r;
        chi2 += (prob.weights[i] * r).powi(2);
    }
    let k = penalty_weight(terms);
    let bic = if prob.weighted {
        chi2 + k * n.ln()
    } else {
        n * (rss / n).max(RSS_FLOOR).ln() + k * n.ln()
    };
    Ok(DecayFit {
        unit_mode_present: modes.iter().any(|m| (m.lambda - 1.0).norm() < tol::FIT),
        model_order: modes.len(),
        modes,
        residual_rms: (rss / n).sqrt(),
        bic,
        weighted: prob.weighted,
        diagnostic,
    })
}

/// Canonical mode order: descending modulus, then real part, then
/// imaginary part.
pub fn sort_modes(modes: &mut [Mode]) {
    modes.sort_by(|x, y| {
        let key = |m: &Mode| (m.lambda.norm(), m.lambda.re, m.lambda.im);
        let (a, b) = (key(y), key(x));
        a.0.partial_cmp(&b.0)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal))
            .then(a.2.partial_cmp(&b.2).unwrap_or(core::cmp::Ordering::Equal))
    });
}

fn fit_order_in(prob: &Problem, order: usize) -> Result<DecayFit> {
    let z = matrix_pencil(&prob.phi, order)?;
    let (terms, lambdas) = poles_to_terms(&z, prob.step);
    let init = amplitudes(prob, &terms, &lambdas)?;
    let p = refine(prob, &terms, &init);
    assemble(prob, &terms, &p, None)
}

/// Single exponential from a log-linear fit, refined.
fn fallback_in(prob: &Problem, reason: &str) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = prob
        .ys
        .iter()
        .zip(&prob.phi)
        .filter(|(_, &v)| v > 0.0)
        .map(|(&y, &v)| (y as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "{reason}; no positive data for a single exponential"
        )));
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts
        .iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let init = [(my - slope * mx).exp(), slope.exp().min(1.0)];
    let terms = [Term::Real];
    let p = refine(prob, &terms, &init);
    assemble(
        prob,
        &terms,
        &p,
        Some(format!("{reason}; fell back to a single exponential")),
    )
}

/// Fits with exactly `order` pencil poles and no order selection.
pub fn fit_decay_order(samples: &[DecaySample], order: usize) -> Result<DecayFit> {
    let prob = Problem::new(samples)?;
    fit_order_in(&prob, order)
}

/// Smallest `|lambda|^step` of a mode that order selection accepts. Faster
/// modes are pinned by a single sample.
pub const MIN_STEP_RETENTION: f64 = 0.1;

fn resolved(fit: &DecayFit, step: usize) -> bool {
    fit.modes
        .iter()
        .all(|m| m.lambda.norm().powi(step as i32) >= MIN_STEP_RETENTION)
}

/// Fits orders `1..=max_order` and keeps the lowest BIC. Orders above one
/// with a mode that decays below [`MIN_STEP_RETENTION`] within one grid
/// step are skipped. When no order can be initialized (rank-deficient
/// Hankel matrix) a single exponential is fitted instead and `diagnostic`
/// says so.
pub fn fit_decay(samples: &[DecaySample], max_order: usize) -> Result<DecayFit> {
    if max_order == 0 {
        return Err(Error::InvalidArgument(
            "max_order must be at least 1".into(),
        ));
    }
    if samples.len() < 2 * max_order + 1 {
        return Err(Error::TooFewSamples {
            needed: 2 * max_order + 1,
            have: samples.len(),
        });
    }
    let prob = Problem::new(samples)?;
    let mut best: Option<DecayFit> = None;
    for order in 1..=max_order {
        if let Ok(fit) = fit_order_in(&prob, order) {
            if order > 1 && !resolved(&fit, prob.step) {
                continue;
            }
            if best.as_ref().is_none_or(|b| fit.bic < b.bic) {
                best = Some(fit);
            }
        }
    }
    match best {
        Some(fit) => Ok(fit),
        None => fallback_in(&prob, "ill-conditioned Hankel matrix"),
    }
}

fn average_ratio(modes: &[Mode]) -> Result<C64> {
    let s0: C64 = modes.iter().map(|m| m.a).sum();
    let s1: C64 = modes.iter().map(|m| m.a * m.lambda).sum();
    if s0.norm() < 1e-12 {
        return Err(Error::DegenerateFit("sum of amplitudes vanishes".into()));
    }
    Ok(s1 / s0)
}

/// `1 - sum(a lambda) / sum(a)`.
pub fn error_per_gate(fit: &DecayFit) -> Result<f64> {
    let r = average_ratio(&fit.modes)?;
    if r.im.abs() > 1e-8 {
        return Err(Error::DegenerateFit(format!(
            "complex fidelity ratio (imaginary part {:.3e})",
            r.im
        )));
    }
    Ok(1.0 - r.re)
}

/// Error per gate from the real modes only, divided by `1 - 2^-N`.
/// Oscillating pairs are left out; when the real modes carry no amplitude
/// the full model is used.
pub fn safe_error_bound(fit: &DecayFit, n_qubits: usize) -> Result<f64> {
    if n_qubits == 0 {
        return Err(Error::InvalidArgument("n_qubits must be positive".into()));
    }
    let real: Vec<Mode> = fit
        .modes
        .iter()
        .copied()
        .filter(|m| m.lambda.im == 0.0)
        .collect();
    let eps = match average_ratio(&real) {
        Ok(r) if !real.is_empty() => 1.0 - r.re,
        _ => error_per_gate(fit)?,
    };
    Ok(eps / (1.0 - 0.5f64.powi(n_qubits as i32)))
}

/// Interleaved estimate of a single gate's error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IrbEstimate {
    pub eps_ref: f64,
    pub eps_combined: f64,
    pub eps_v_point: f64,
    pub eps_v_lower: f64,
    pub eps_v_upper: f64,
    /// Set when `eps_combined < eps_ref` and the point estimate was clamped
    /// to zero.
    pub clamped: bool,
}

impl IrbEstimate {
    /// Point estimate `eps_c - eps_r` with bounds
    /// `(sqrt(eps_c) -+ sqrt(eps_r))^2`. Negative inputs are read as zero.
    pub fn from_errors(eps_ref: f64, eps_combined: f64) -> Result<Self> {
        if !(eps_ref.is_finite() && eps_combined.is_finite()) {
            return Err(Error::InvalidArgument("non-finite error rates".into()));
        }
        let (r, c) = (eps_ref.max(0.0), eps_combined.max(0.0));
        let clamped = c < r;
        let point = (c - r).max(0.0);
        let lower = (c.sqrt() - r.sqrt()).powi(2);
        Ok(Self {
            eps_ref,
            eps_combined,
            eps_v_point: point,
            eps_v_lower: if clamped { 0.0 } else { lower },
            eps_v_upper: (c.sqrt() + r.sqrt()).powi(2),
            clamped,
        })
    }

    pub fn contains(&self, eps: f64) -> bool {
        eps >= self.eps_v_lower && eps <= self.eps_v_upper
    }

    pub fn diagnostic(&self) -> Option<&'static str> {
        self.clamped
            .then_some("combined error below reference error; point estimate clamped to 0")
    }
}

pub fn irb_estimate(ref_fit: &DecayFit, int_fit: &DecayFit) -> Result<IrbEstimate> {
    IrbEstimate::from_errors(error_per_gate(ref_fit)?, error_per_gate(int_fit)?)
}

/// Noiseless samples of a fitted model on the grid `ys`.
pub fn model_samples(fit: &DecayFit, ys: &[usize]) -> Vec<DecaySample> {
    ys.iter()
        .map(|&y| DecaySample {
            y,
            phi_mean: fit.predict(y),
            phi_stderr: 0.0,
            k: 1,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noiseless(ys: impl Iterator<Item = usize>, f: impl Fn(usize) -> f64) -> Vec<DecaySample> {
        ys.map(|y| DecaySample::new(y, f(y), 0.0, 1).unwrap())
            .collect()
    }

    #[test]
    fn recovers_offset_exponential() {
        let s = noiseless((1..=40).map(|k| 5 * k), |y| {
            0.5 + 0.4 * 0.99f64.powi(y as i32)
        });
        let fit = fit_decay(&s, 3).unwrap();
        assert_eq!(fit.model_order, 2);
        assert!(fit.unit_mode_present);
        let (m0, m1) = (fit.modes[0], fit.modes[1]);
        assert!((m0.lambda.re - 1.0).abs() < 1e-6 && (m0.a.re - 0.5).abs() < 1e-6);
        assert!((m1.lambda.re - 0.99).abs() < 1e-6 && (m1.a.re - 0.4).abs() < 1e-6);
        assert!(fit.diagnostic.is_none());
    }

    #[test]
    fn unresolved_fast_mode_is_not_selected() {
        let s = noiseless((0..30).map(|k| 1 + 20 * k), |y| {
            0.1 + 0.85 * 0.998f64.powi(y as i32) + 0.05 * 0.8f64.powi(y as i32)
        });
        let full = fit_decay_order(&s, 3).unwrap();
        assert!(full.modes.iter().any(|m| (m.lambda.re - 0.8).abs() < 1e-6));
        let fit = fit_decay(&s, 3).unwrap();
        assert_eq!(fit.model_order, 2);
        assert!(fit
            .modes
            .iter()
            .all(|m| m.lambda.norm().powi(20) >= MIN_STEP_RETENTION));
    }

    #[test]
    fn single_exponential_is_order_one() {
        let s = noiseless((0..20).map(|k| 2 * k), |y| 0.9 * 0.97f64.powi(y as i32));
        let fit = fit_decay(&s, 2).unwrap();
        assert_eq!(fit.model_order, 1);
        assert!((fit.modes[0].lambda.re - 0.97).abs() < 1e-9);
    }

    #[test]
    fn oscillating_pair_is_conjugate() {
        let l = C64::from_polar(0.98, 0.3);
        let a = C64::new(0.1, 0.05);
        let s = noiseless(1..=30, |y| 0.5 + 2.0 * (a * l.powi(y as i32)).re);
        let fit = fit_decay(&s, 3).unwrap();
        assert_eq!(fit.model_order, 3);
        let pair: Vec<&Mode> = fit.modes.iter().filter(|m| m.lambda.im != 0.0).collect();
        assert_eq!(pair.len(), 2);
        assert!((pair[0].lambda - pair[1].lambda.conj()).norm() < 1e-14);
        assert!((pair[0].a - pair[1].a.conj()).norm() < 1e-14);
        assert!((pair[0].lambda - l).norm() < 1e-8);
    }

    #[test]
    fn spacing_and_size_errors() {
        let mut s = noiseless(1..=10, |_| 0.9);
        s[3].y = 100;
        assert_eq!(fit_decay(&s, 1), Err(Error::NonUniformSpacing));
        assert!(matches!(
            fit_decay(&s[..4], 2),
            Err(Error::TooFewSamples { .. })
        ));
        assert!(DecaySample::new(1, 1.1, 0.0, 1).is_err());
        assert!(DecaySample::new(1, 0.5, -1.0, 1).is_err());
    }

    #[test]
    fn zero_data_cannot_be_fitted() {
        let s = noiseless(1..=10, |_| 0.0);
        assert!(matches!(fit_decay(&s, 2), Err(Error::DegenerateFit(_))));
    }

    fn fit_of(modes: &[(f64, f64)]) -> DecayFit {
        DecayFit {
            modes: modes
                .iter()
                .map(|&(a, l)| Mode {
                    a: C64::new(a, 0.0),
                    lambda: C64::new(l, 0.0),
                })
                .collect(),
            residual_rms: 0.0,
            model_order: modes.len(),
            unit_mode_present: false,
            bic: 0.0,
            weighted: false,
            diagnostic: None,
        }
    }

    #[test]
    fn error_per_gate_arithmetic() {
        assert_eq!(error_per_gate(&fit_of(&[(1.0, 1.0)])).unwrap(), 0.0);
        assert!(
            (error_per_gate(&fit_of(&[(0.5, 1.0), (0.5, 0.99)])).unwrap() - 0.005).abs() < 1e-15
        );
        assert!(error_per_gate(&fit_of(&[(0.5, 1.0), (-0.5, 0.99)])).is_err());
    }

    #[test]
    fn safe_bound_arithmetic() {
        let f = fit_of(&[(1.0, 1.0 - 1e-3)]);
        assert!((safe_error_bound(&f, 1).unwrap() - 2e-3).abs() < 1e-12);
        assert!((safe_error_bound(&f, 2).unwrap() - 1.333_333_333e-3).abs() < 1e-9);
    }

    #[test]
    fn irb_formulas() {
        let e = IrbEstimate::from_errors(0.0, 1e-3).unwrap();
        for v in [e.eps_v_point, e.eps_v_lower, e.eps_v_upper] {
            assert!((v - 1e-3).abs() < 1e-18);
        }
        let e = IrbEstimate::from_errors(7.57e-4, 1.304e-3).unwrap();
        assert!((e.eps_v_point - 5.47e-4).abs() < 1e-12);
        assert!(e.eps_v_lower <= e.eps_v_point && e.eps_v_point <= e.eps_v_upper);
        let e = IrbEstimate::from_errors(2e-3, 1e-3).unwrap();
        assert!(e.clamped && e.eps_v_point == 0.0 && e.diagnostic().is_some());
        assert!(e.eps_v_lower <= e.eps_v_point);
    }
}
