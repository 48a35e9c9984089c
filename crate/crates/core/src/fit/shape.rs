use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::lm::{levenberg_marquardt, LmOptions};
use crate::engine::VarianceCurve;
use crate::{Error, Result};

/// `variance(y) ~ c y exp(-kappa y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceShape {
    pub c: f64,
    pub kappa: f64,
    pub r_squared: f64,
}

/// Unweighted least-squares fit of the variance curve, initialized from a
/// log-linear fit of `variance / y`.
pub fn fit_variance_shape(curve: &VarianceCurve) -> Result<VarianceShape> {
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .map(|p| (p.y as f64, p.variance))
        .collect();
    if pts.len() < 4 {
        return Err(Error::TooFewSamples {
            needed: 4,
            have: pts.len(),
        });
    }
    if pts.iter().any(|p| !p.1.is_finite()) {
        return Err(Error::InvalidArgument("non-finite variance".into()));
    }
    let logs: Vec<(f64, f64)> = pts
        .iter()
        .filter(|p| p.0 > 0.0 && p.1 > 0.0)
        .map(|&(y, v)| (y, (v / y).ln()))
        .collect();
    let init = if logs.len() >= 2 {
        let m = logs.len() as f64;
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        [(my - slope * mx).exp(), -slope]
    } else {
        let ratio = pts
            .iter()
            .filter(|p| p.0 > 0.0)
            .map(|p| p.1 / p.0)
            .sum::<f64>()
            / pts.len() as f64;
        [ratio, 0.0]
    };
    let out = levenberg_marquardt(
        &init,
        pts.len(),
        |p, r, jac| {
            for (i, &(y, v)) in pts.iter().enumerate() {
                let e = (-p[1] * y).exp();
                r[i] = p[0] * y * e - v;
                jac[(i, 0)] = y * e;
                jac[(i, 1)] = -p[0] * y * y * e;
            }
        },
        |_| {},
        &LmOptions::default(),
    );
    let (c, kappa) = (out.params[0], out.params[1]);
    let mean = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - out.cost / ss_tot
    } else if out.cost == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(VarianceShape {
        c,
        kappa,
        r_squared,
    })
}
