//! g⁽²⁾ estimators from coincidence and single-event counts.

use serde::Serialize;

use super::binomial::binomial_ci;
use super::tabulate::TrialTable;
use crate::error::AnalysisError;
use crate::tags::PulseLabel;

/// ML g⁽²⁾ with its 68 % interval and the counts it came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelationEstimate {
    pub value: f64,
    pub sigma_minus: f64,
    pub sigma_plus: f64,
    pub coincidences: u64,
    pub singles: [u64; 2],
    pub trials: u64,
}

impl CorrelationEstimate {
    pub fn lower(&self) -> f64 {
        self.value - self.sigma_minus
    }

    pub fn upper(&self) -> f64 {
        self.value + self.sigma_plus
    }

    /// Estimate with every field NaN, for settings whose estimator failed.
    pub fn undefined() -> Self {
        Self {
            value: f64::NAN,
            sigma_minus: f64::NAN,
            sigma_plus: f64::NAN,
            coincidences: 0,
            singles: [0, 0],
            trials: 0,
        }
    }
}

/// P(X∩Y) / (P(X) P(Y)). The interval comes from the coincidence likelihood
/// alone, with the singles held at their ML rates.
pub fn correlation_from_counts(
    coincidences: u64,
    singles: [u64; 2],
    trials: u64,
    what: &'static str,
) -> Result<CorrelationEstimate, AnalysisError> {
    if trials == 0 {
        return Err(AnalysisError::NoTrials);
    }
    for &s in &singles {
        if s > trials {
            return Err(AnalysisError::CountsExceedTrials { events: s, trials });
        }
    }
    if coincidences > singles[0].min(singles[1]) {
        return Err(AnalysisError::CountsExceedTrials {
            events: coincidences,
            trials: singles[0].min(singles[1]),
        });
    }
    if singles[0] == 0 || singles[1] == 0 {
        return Err(AnalysisError::ZeroSingles(what));
    }
    let t = trials as f64;
    let scale = (singles[0] as f64 / t) * (singles[1] as f64 / t);
    let ci = binomial_ci(coincidences, trials)?;
    Ok(CorrelationEstimate {
        value: ci.p_ml / scale,
        sigma_minus: ci.sigma_minus / scale,
        sigma_plus: ci.sigma_plus / scale,
        coincidences,
        singles,
        trials,
    })
}

/// g⁽²⁾_om(Δn) between the write window of trial n and the read window of
/// trial n + Δn within one delay block.
pub fn g2_cross_estimate(
    table: &TrialTable,
    block: usize,
    delta_n: i64,
) -> Result<CorrelationEstimate, AnalysisError> {
    if block >= table.blocks() {
        return Err(AnalysisError::UnknownSetting(block));
    }
    let c = table.pair_counts(block, delta_n)?;
    correlation_from_counts(c.both, [c.write, c.read], c.pairs, "write/read")
}

/// Two-detector autocorrelation of one window. Write counts are pooled over
/// every delay setting; read counts come from `block` only.
pub fn g2_auto_estimate(
    table: &TrialTable,
    window: PulseLabel,
    block: usize,
) -> Result<CorrelationEstimate, AnalysisError> {
    if block >= table.blocks() {
        return Err(AnalysisError::UnknownSetting(block));
    }
    match window {
        PulseLabel::Write => {
            let c = table.pooled_counts();
            correlation_from_counts(c.w1w2, [c.w1, c.w2], c.trials, "write")
        }
        PulseLabel::Read => {
            let c = table.block_counts(block);
            correlation_from_counts(c.r1r2, [c.r1, c.r2], c.trials, "read")
        }
    }
}
