//! Fits the heating amplitude to a target cross-correlation curve.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::table::build_outcome_table;
use crate::error::{AnalysisError, Error};

/// Search interval for the heating amplitude (occupation units).
pub const A_HEAT_MAX: f64 = 1.0;
const A_TOL: f64 = 1e-6;
/// Relative RMS mismatch tolerated when the optimum sits on a search edge.
const EDGE_RMS_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetPoint {
    pub delta_t_ns: f64,
    pub g2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Calibration {
    pub a_heat: f64,
    /// RMS of (model − target) / target.
    pub relative_rms: f64,
    /// Model g⁽²⁾_om at each target delay.
    pub model: Vec<f64>,
    pub evaluations: usize,
}

fn model_curve(cfg: &ExperimentConfig, a: f64, target: &[TargetPoint]) -> Result<Vec<f64>, Error> {
    let mut c = cfg.clone();
    c.heating.a_heat = a;
    target
        .iter()
        .map(|t| Ok(build_outcome_table(&c, t.delta_t_ns)?.g2_cross()?))
        .collect()
}

fn relative_rms(model: &[f64], target: &[TargetPoint]) -> f64 {
    let ss: f64 = model
        .iter()
        .zip(target)
        .map(|(m, t)| ((m - t.g2) / t.g2).powi(2))
        .sum();
    (ss / target.len() as f64).sqrt()
}

/// Least-squares heating amplitude by golden-section search on
/// `[0, A_HEAT_MAX]`. Fails when the best point is a search edge that still
/// misses the target.
pub fn calibrate_heating(
    cfg: &ExperimentConfig,
    target: &[TargetPoint],
) -> Result<Calibration, Error> {
    if target.is_empty() {
        return Err(AnalysisError::TooFewPoints { needed: 1, got: 0 }.into());
    }
    for t in target {
        if !(t.g2 > 0.0 && t.g2.is_finite()) {
            return Err(AnalysisError::InvalidInput {
                name: "target g2",
                value: t.g2,
                reason: "must be positive and finite",
            }
            .into());
        }
    }
    let mut evaluations = 0;
    let mut cost = |a: f64| -> Result<f64, Error> {
        evaluations += 1;
        Ok(relative_rms(&model_curve(cfg, a, target)?, target))
    };

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, A_HEAT_MAX);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = cost(x1)?;
    let mut f2 = cost(x2)?;
    while hi - lo > A_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = cost(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = cost(x2)?;
        }
    }
    let mid = 0.5 * (lo + hi);
    let mut best = (mid, cost(mid)?);
    for edge in [0.0, A_HEAT_MAX] {
        let f = cost(edge)?;
        if f <= best.1 {
            best = (edge, f);
        }
    }
    let (a, rms) = best;
    let on_edge = a < 10.0 * A_TOL || a > A_HEAT_MAX - 10.0 * A_TOL;
    if on_edge && rms > EDGE_RMS_TOL {
        return Err(AnalysisError::NonConvergence(format!(
            "target unreachable: best a_heat = {a:.4} on the search edge [0, {A_HEAT_MAX}] leaves relative RMS {rms:.3e}"
        ))
        .into());
    }
    Ok(Calibration {
        a_heat: a,
        relative_rms: rms,
        model: model_curve(cfg, a, target)?,
        evaluations,
    })
}
