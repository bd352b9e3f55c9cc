//! Single-exponential least-squares fits.
//!
//! For a fixed time constant the amplitude and offset enter linearly, so they
//! are solved in closed form and only τ is searched: a log-spaced scan seeds a
//! golden-section refinement in ln τ.

use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;

const SCAN_POINTS: usize = 200;
const REFINE_ITERATIONS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    /// y = C + A e^{−t/τ}
    Decay,
    /// y = C + A (1 − e^{−t/τ})
    SaturatingRise,
}

impl FitModel {
    fn basis(self, t: f64, tau: f64) -> f64 {
        let e = (-t / tau).exp();
        match self {
            FitModel::Decay => e,
            FitModel::SaturatingRise => 1.0 - e,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentialFit {
    pub model: FitModel,
    pub amplitude: f64,
    /// Same unit as the time axis; NaN for a constant series.
    pub time_constant: f64,
    pub offset: f64,
    pub rms: f64,
    pub residuals: Vec<f64>,
}

/// (amplitude, offset, sum of squared residuals) at fixed τ.
fn linear_part(t: &[f64], y: &[f64], model: FitModel, tau: f64) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let phi: Vec<f64> = t.iter().map(|&ti| model.basis(ti, tau)).collect();
    let pm = phi.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (p, v) in phi.iter().zip(y) {
        sxy += (p - pm) * (v - ym);
        sxx += (p - pm) * (p - pm);
    }
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let c = ym - a * pm;
    let sse = phi
        .iter()
        .zip(y)
        .map(|(p, v)| (v - a * p - c).powi(2))
        .sum();
    (a, c, sse)
}

pub fn fit_exponential(t: &[f64], y: &[f64], model: FitModel) -> Result<ExponentialFit, AnalysisError> {
    if t.len() != y.len() {
        return Err(AnalysisError::InvalidInput {
            name: "series length",
            value: y.len() as f64,
            reason: "time and value series differ in length",
        });
    }
    if t.len() < 4 {
        return Err(AnalysisError::TooFewPoints { needed: 4, got: t.len() });
    }
    if t.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(AnalysisError::InvalidInput {
            name: "series",
            value: f64::NAN,
            reason: "values must be finite",
        });
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AnalysisError::Unsorted);
    }

    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let spread = y.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    if spread <= 1e-12 * mean.abs().max(1.0) {
        return Ok(ExponentialFit {
            model,
            amplitude: 0.0,
            time_constant: f64::NAN,
            offset: mean,
            rms: (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64).sqrt(),
            residuals: y.iter().map(|v| v - mean).collect(),
        });
    }

    let span = t[t.len() - 1] - t[0];
    let min_step = t.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let (lo, hi) = ((min_step / 10.0).ln(), (10.0 * span.max(t[t.len() - 1])).ln());
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let sse_at = |ln_tau: f64| linear_part(t, y, model, ln_tau.exp()).2;
    let scan: Vec<f64> = (0..SCAN_POINTS).map(|i| sse_at(lo + i as f64 * step)).collect();
    let best = scan
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if *v < scan[b] { i } else { b });
    if best == 0 || best == SCAN_POINTS - 1 {
        return Err(AnalysisError::NonConvergence(format!(
            "time constant runs to the edge of the search range [{:.3e}, {:.3e}]",
            lo.exp(),
            hi.exp()
        )));
    }

    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo + (best - 1) as f64 * step, lo + (best + 1) as f64 * step);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (sse_at(x1), sse_at(x2));
    for _ in 0..REFINE_ITERATIONS {
        if b - a < 1e-14 {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = sse_at(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = sse_at(x2);
        }
    }
    let tau = (0.5 * (a + b)).exp();
    let (amplitude, offset, sse) = linear_part(t, y, model, tau);
    let residuals = t
        .iter()
        .zip(y)
        .map(|(&ti, v)| v - amplitude * model.basis(ti, tau) - offset)
        .collect();
    Ok(ExponentialFit {
        model,
        amplitude,
        time_constant: tau,
        offset,
        rms: (sse / t.len() as f64).sqrt(),
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_decay_round_trip() {
        let t: Vec<f64> = (0..40).map(|i| 2.0 + 4.0 * i as f64).collect();
        let y: Vec<f64> = t.iter().map(|&x| 0.1 + 2.5 * (-x / 34.4).exp()).collect();
        let f = fit_exponential(&t, &y, FitModel::Decay).unwrap();
        assert!((f.time_constant / 34.4 - 1.0).abs() < 1e-6, "{f:?}");
        assert!((f.amplitude - 2.5).abs() < 1e-6);
        assert!((f.offset - 0.1).abs() < 1e-6);
    }

    #[test]
    fn exact_rise_round_trip() {
        let t: Vec<f64> = (0..30).map(|i| 0.05 * i as f64).collect();
        let y: Vec<f64> = t.iter().map(|&x| 0.2 + 1.3 * (1.0 - (-x / 0.37).exp())).collect();
        let f = fit_exponential(&t, &y, FitModel::SaturatingRise).unwrap();
        assert!((f.time_constant / 0.37 - 1.0).abs() < 1e-6, "{f:?}");
    }

    #[test]
    fn constant_series() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0];
        let f = fit_exponential(&t, &[3.0; 5], FitModel::Decay).unwrap();
        assert_eq!(f.amplitude, 0.0);
        assert_eq!(f.offset, 3.0);
        assert!(f.time_constant.is_nan());
    }

    #[test]
    fn input_checks() {
        assert!(matches!(
            fit_exponential(&[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0], FitModel::Decay),
            Err(AnalysisError::TooFewPoints { .. })
        ));
        assert_eq!(
            fit_exponential(&[0.0, 2.0, 1.0, 3.0], &[1.0, 0.5, 0.7, 0.2], FitModel::Decay).unwrap_err(),
            AnalysisError::Unsorted
        );
        // a straight line has no finite time constant
        let t = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(matches!(
            fit_exponential(&t, &y, FitModel::Decay),
            Err(AnalysisError::NonConvergence(_))
        ));
    }
}
