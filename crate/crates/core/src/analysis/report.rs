//! Per-delay correlation table and Cauchy–Schwarz verdicts for a tabulated
//! run, with CSV and JSON renderings.

use std::fmt::Write as _;

use serde::Serialize;

use super::bound::{cauchy_schwarz_test, classical_bound, AutocorrelationInput, Verdict};
use super::correlation::{
    correlation_from_counts, g2_auto_estimate, g2_cross_estimate, CorrelationEstimate,
};
use super::tabulate::{EventCounts, TrialTable};
use crate::tags::PulseLabel;

pub const CSV_HEADER: &str =
    "delta_t_ns,g2_om,ci_minus,ci_plus,bound,bound_ci_minus,bound_ci_plus,violated";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnalysisOptions {
    /// Trim the read window to this length (ns).
    pub read_window_ns: Option<f64>,
    /// Also estimate g⁽²⁾_om(Δn) for Δn = 1..=delta_n.
    pub delta_n: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OffsetResult {
    pub delta_n: i64,
    pub estimate: CorrelationEstimate,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DelayResult {
    pub delta_t_ns: f64,
    pub counts: EventCounts,
    pub cross: CorrelationEstimate,
    pub auto_write: CorrelationEstimate,
    pub auto_read: CorrelationEstimate,
    pub bound: CorrelationEstimate,
    pub verdict: Option<Verdict>,
    pub errors: Vec<String>,
    pub offsets: Vec<OffsetResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub trial_count: u64,
    pub read_window_ns: f64,
    pub settings: Vec<DelayResult>,
    /// g⁽²⁾_om over all Δn ≠ 0 pairings of the sweep, from counts summed
    /// across offsets and settings.
    pub offset_pooled: Option<CorrelationEstimate>,
}

fn or_undefined(
    r: Result<CorrelationEstimate, crate::error::AnalysisError>,
    what: &str,
    errors: &mut Vec<String>,
) -> CorrelationEstimate {
    r.unwrap_or_else(|e| {
        errors.push(format!("{what}: {e}"));
        CorrelationEstimate::undefined()
    })
}

pub fn analyze(table: &TrialTable, opts: &AnalysisOptions) -> AnalysisReport {
    let mut settings = Vec::with_capacity(table.blocks());
    // (coincidences, write singles, read singles, pairs) summed over Δn ≠ 0
    let mut pooled = [0u64; 4];
    for b in 0..table.blocks() {
        let mut errors = Vec::new();
        let cross = or_undefined(g2_cross_estimate(table, b, 0), "cross", &mut errors);
        let auto_write = or_undefined(
            g2_auto_estimate(table, PulseLabel::Write, b),
            "write autocorrelation",
            &mut errors,
        );
        let auto_read = or_undefined(
            g2_auto_estimate(table, PulseLabel::Read, b),
            "read autocorrelation",
            &mut errors,
        );
        let bound = if auto_write.trials > 0 && auto_read.trials > 0 {
            or_undefined(
                classical_bound(
                    &AutocorrelationInput::from(&auto_write),
                    &AutocorrelationInput::from(&auto_read),
                ),
                "bound",
                &mut errors,
            )
        } else {
            CorrelationEstimate::undefined()
        };
        let verdict = (cross.value.is_finite() && bound.value.is_finite())
            .then(|| cauchy_schwarz_test(&cross, &bound));
        let offsets = (1..=opts.delta_n.unwrap_or(0) as i64)
            .map(|dn| match g2_cross_estimate(table, b, dn) {
                Ok(e) => {
                    pooled[0] += e.coincidences;
                    pooled[1] += e.singles[0];
                    pooled[2] += e.singles[1];
                    pooled[3] += e.trials;
                    OffsetResult {
                        delta_n: dn,
                        estimate: e,
                        error: None,
                    }
                }
                Err(e) => OffsetResult {
                    delta_n: dn,
                    estimate: CorrelationEstimate::undefined(),
                    error: Some(e.to_string()),
                },
            })
            .collect();
        settings.push(DelayResult {
            delta_t_ns: table.layout.blocks[b].delta_t_ns,
            counts: table.block_counts(b),
            cross,
            auto_write,
            auto_read,
            bound,
            verdict,
            errors,
            offsets,
        });
    }
    let offset_pooled = (pooled[3] > 0)
        .then(|| correlation_from_counts(pooled[0], [pooled[1], pooled[2]], pooled[3], "write/read").ok())
        .flatten();
    AnalysisReport {
        trial_count: table.trial_count(),
        read_window_ns: table.read_window_ps as f64 * 1e-3,
        settings,
        offset_pooled,
    }
}

impl AnalysisReport {
    /// No setting produced a finite cross-correlation.
    pub fn is_empty(&self) -> bool {
        self.settings.iter().all(|s| !s.cross.value.is_finite())
    }

    pub fn csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for s in &self.settings {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.delta_t_ns,
                s.cross.value,
                s.cross.sigma_minus,
                s.cross.sigma_plus,
                s.bound.value,
                s.bound.sigma_minus,
                s.bound.sigma_plus,
                s.verdict.is_some_and(|v| v.violated)
            );
        }
        out
    }

    pub fn offsets_csv(&self) -> String {
        let mut out = String::from("delta_t_ns,delta_n,g2_om,ci_minus,ci_plus\n");
        for s in &self.settings {
            for o in &s.offsets {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    s.delta_t_ns, o.delta_n, o.estimate.value, o.estimate.sigma_minus, o.estimate.sigma_plus
                );
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
