//! Occupation from the Stokes / anti-Stokes rate asymmetry,
//! n = Γ_R / (Γ_B − Γ_R).

use serde::{Deserialize, Serialize};

use super::binomial::binomial_ci;
use crate::error::AnalysisError;

/// Click count over a number of pulses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateCount {
    pub counts: u64,
    pub pulses: u64,
}

impl RateCount {
    pub fn rate(&self) -> f64 {
        self.counts as f64 / self.pulses as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Occupancy {
    pub value: f64,
    pub sigma_minus: f64,
    pub sigma_plus: f64,
    /// The leak-corrected anti-Stokes rate is not positive: only the upper
    /// edge is informative.
    pub limit_only: bool,
}

fn check_rate(name: &'static str, v: f64) -> Result<(), AnalysisError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(AnalysisError::InvalidInput {
            name,
            value: v,
            reason: "rates must be finite and non-negative",
        })
    }
}

fn occupancy(red: f64, blue: f64, leak_red: f64, leak_blue: f64) -> Result<f64, AnalysisError> {
    let r = (red - leak_red).max(0.0);
    let b = blue - leak_blue;
    if b - r <= 0.0 {
        return Err(AnalysisError::NonPositiveDenominator { blue: b, red: r });
    }
    Ok(r / (b - r))
}

/// Occupation from per-pulse rates after subtracting the same leak rate from
/// both sidebands.
pub fn sideband_occupancy(rate_red: f64, rate_blue: f64, leak_rate: f64) -> Result<f64, AnalysisError> {
    check_rate("rate_red", rate_red)?;
    check_rate("rate_blue", rate_blue)?;
    check_rate("leak_rate", leak_rate)?;
    occupancy(rate_red, rate_blue, leak_rate, leak_rate)
}

/// Occupation with a 68 % interval. Each count's likelihood interval is
/// pushed through the estimator separately and the one-sided shifts are
/// added in quadrature.
pub fn sideband_occupancy_from_counts(
    red: RateCount,
    blue: RateCount,
    leak_red: Option<RateCount>,
    leak_blue: Option<RateCount>,
) -> Result<Occupancy, AnalysisError> {
    let inputs = [Some(red), Some(blue), leak_red, leak_blue];
    let mut x = [0.0; 4];
    let mut ci = [(0.0, 0.0); 4];
    for (i, c) in inputs.iter().enumerate() {
        if let Some(c) = c {
            let b = binomial_ci(c.counts, c.pulses)?;
            x[i] = b.p_ml;
            ci[i] = (b.sigma_minus, b.sigma_plus);
        }
    }
    let f = |v: &[f64; 4]| occupancy(v[0], v[1], v[2], v[3]);
    let value = f(&x)?;
    let (mut down, mut up) = (0.0f64, 0.0f64);
    for i in 0..4 {
        for shift in [-ci[i].0, ci[i].1] {
            if shift == 0.0 {
                continue;
            }
            let mut y = x;
            y[i] = (y[i] + shift).max(0.0);
            let d = match f(&y) {
                Ok(v) => v - value,
                Err(_) => f64::INFINITY,
            };
            if d > 0.0 {
                up = up.hypot(d);
            } else {
                down = down.hypot(d);
            }
        }
    }
    let limit_only = x[0] - x[2] <= 0.0;
    Ok(Occupancy {
        value,
        sigma_minus: if limit_only { 0.0 } else { down.min(value) },
        sigma_plus: up,
        limit_only,
    })
}
