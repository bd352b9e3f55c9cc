//! Exact click-pattern distribution of one write/read pulse pair.

use serde::Serialize;

use super::config::{ExperimentConfig, Pulse};
use super::heating::heating_occupation;
use crate::error::{AnalysisError, QuantumError};
use crate::quantum::{
    split_click_povm, split_click_probabilities, thermal_state, ClickTable, DetectorModel, Mode,
    required_truncation, SingleModeState, TwoModeFockState, DEFAULT_N_MAX, LEAK_TOL,
};

/// Largest cutoff tried before a configuration is declared truncation-unsafe.
pub const MAX_N_MAX: usize = 40;
const N_MAX_STEP: usize = 4;

/// Pattern index of a click combination: bit 0 write detector 1, bit 1 write
/// detector 2, bit 2 read detector 1, bit 3 read detector 2.
pub fn pattern_index(w1: bool, w2: bool, r1: bool, r2: bool) -> usize {
    w1 as usize | (w2 as usize) << 1 | (r1 as usize) << 2 | (r2 as usize) << 3
}

/// (w1, w2, r1, r2) of a pattern index.
pub fn pattern_bits(k: usize) -> [bool; 4] {
    [k & 1 != 0, k & 2 != 0, k & 4 != 0, k & 8 != 0]
}

/// Runs `build` at increasing Fock cutoffs until it stops reporting
/// truncation leakage or the cutoff reaches [`MAX_N_MAX`].
pub(crate) fn with_growing_cutoff<T>(
    start: usize,
    build: impl Fn(usize) -> Result<T, QuantumError>,
) -> Result<T, QuantumError> {
    let mut n_max = start.clamp(DEFAULT_N_MAX, MAX_N_MAX);
    loop {
        match build(n_max) {
            Err(QuantumError::TruncationUnsafe { .. }) if n_max < MAX_N_MAX => {
                n_max = (n_max + N_MAX_STEP).min(MAX_N_MAX);
            }
            other => return other,
        }
    }
}

/// Physical inputs of one table, decoupled from the config file so tests can
/// switch individual noise sources off.
#[derive(Clone, Debug, PartialEq)]
pub struct PulsePairModel {
    pub n_base: f64,
    pub p_pair: f64,
    pub eps_read: f64,
    /// Occupation added to the mechanics between write and read.
    pub added_occupation: f64,
    pub write_detectors: [DetectorModel; 2],
    pub read_detectors: [DetectorModel; 2],
}

impl PulsePairModel {
    pub fn from_config(cfg: &ExperimentConfig, delta_t_ns: f64) -> Self {
        let h = &cfg.heating;
        Self {
            n_base: h.n_base,
            p_pair: cfg.protocol.p_pair,
            eps_read: cfg.protocol.eps_read,
            added_occupation: heating_occupation(delta_t_ns, h) - h.n_base + h.read_heat,
            write_detectors: cfg.detectors(Pulse::Write),
            read_detectors: cfg.detectors(Pulse::Read),
        }
    }

    /// Squeezing parameter with sinh²r = p_pair.
    pub fn squeeze_parameter(&self) -> f64 {
        self.p_pair.sqrt().asinh()
    }

    /// Builds the table, growing the Fock cutoff until every intermediate
    /// state is truncation-safe.
    pub fn outcome_table(&self, delta_t_ns: f64) -> Result<OutcomeTable, QuantumError> {
        let hint = required_truncation(self.n_base + self.added_occupation, LEAK_TOL);
        with_growing_cutoff(hint, |n_max| self.outcome_table_at(delta_t_ns, n_max))
    }

    /// Builds the table at a fixed cutoff.
    pub fn outcome_table_at(
        &self,
        delta_t_ns: f64,
        n_max: usize,
    ) -> Result<OutcomeTable, QuantumError> {
        let mech = thermal_state(self.n_base, n_max)?;
        let pair = TwoModeFockState::product(&mech, &SingleModeState::vacuum(n_max))?
            .two_mode_squeeze(self.squeeze_parameter(), 0.0)?;

        let [w1, w2] = &self.write_detectors;
        let [r1, r2] = &self.read_detectors;
        let mut probabilities = [0.0; 16];
        let mut branches = Vec::with_capacity(4);
        // povm slot k = (first clicks) << 1 | (second clicks)
        for k in 0..4 {
            let (c1, c2) = (k & 2 != 0, k & 1 != 0);
            let effect: Vec<f64> = (0..=n_max).map(|n| split_click_povm(w1, w2, n)[k]).collect();
            let (p_write, heralded) = pair.condition(Mode::B, &effect);
            let after_write = heralded.mean();
            let at_read = heralded.additive_noise(self.added_occupation)?;
            // a beam splitter onto the vacuum read mode leaves that mode in the
            // mechanical state attenuated by eps_read
            let read_mode = at_read.attenuate(self.eps_read)?;
            let read_populations = read_mode.populations();
            let read = split_click_probabilities(&read_populations, r1, r2);
            for (slot, p) in [read.p00, read.p01, read.p10, read.p11].into_iter().enumerate() {
                let (d1, d2) = (slot & 2 != 0, slot & 1 != 0);
                probabilities[pattern_index(c1, c2, d1, d2)] = p_write * p;
            }
            branches.push(HeraldBranch {
                write_clicks: [c1, c2],
                probability: p_write,
                mechanics_after_write: after_write,
                mechanics_at_read: at_read.mean(),
                read_mode_mean: read_mode.mean(),
                read_clicks: read,
                read_populations,
            });
        }
        for p in &mut probabilities {
            *p = p.max(0.0);
        }
        Ok(OutcomeTable {
            delta_t_ns,
            n_max,
            added_occupation: self.added_occupation,
            probabilities,
            branches,
        })
    }
}

/// Conditional bookkeeping for one write-click pattern.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeraldBranch {
    pub write_clicks: [bool; 2],
    pub probability: f64,
    pub mechanics_after_write: f64,
    pub mechanics_at_read: f64,
    pub read_mode_mean: f64,
    /// Read click table conditional on this write pattern.
    pub read_clicks: ClickTable,
    pub read_populations: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeTable {
    pub delta_t_ns: f64,
    pub n_max: usize,
    pub added_occupation: f64,
    /// Indexed by [`pattern_index`].
    pub probabilities: [f64; 16],
    pub branches: Vec<HeraldBranch>,
}

pub fn build_outcome_table(
    cfg: &ExperimentConfig,
    delta_t_ns: f64,
) -> Result<OutcomeTable, QuantumError> {
    PulsePairModel::from_config(cfg, delta_t_ns).outcome_table(delta_t_ns)
}

impl OutcomeTable {
    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Probability of the event selected by `pred(w1, w2, r1, r2)`.
    pub fn probability_of(&self, pred: impl Fn([bool; 4]) -> bool) -> f64 {
        (0..16)
            .filter(|&k| pred(pattern_bits(k)))
            .map(|k| self.probabilities[k])
            .sum()
    }

    pub fn p_write(&self) -> f64 {
        self.probability_of(|b| b[0] || b[1])
    }

    pub fn p_read(&self) -> f64 {
        self.probability_of(|b| b[2] || b[3])
    }

    /// g⁽²⁾_om(0): write and read of the same trial.
    pub fn g2_cross(&self) -> Result<f64, AnalysisError> {
        self.g2_cross_offset(0)
    }

    /// g⁽²⁾_om(Δn): write of trial n with read of trial n+Δn. Distinct trials
    /// are independent draws from the same table.
    pub fn g2_cross_offset(&self, delta_n: i64) -> Result<f64, AnalysisError> {
        let (pw, pr) = (self.p_write(), self.p_read());
        if pw <= 0.0 {
            return Err(AnalysisError::ZeroSingles("write"));
        }
        if pr <= 0.0 {
            return Err(AnalysisError::ZeroSingles("read"));
        }
        let joint = if delta_n == 0 {
            self.probability_of(|b| (b[0] || b[1]) && (b[2] || b[3]))
        } else {
            pw * pr
        };
        Ok(joint / (pw * pr))
    }

    fn auto(&self, i: usize, j: usize, what: &'static str) -> Result<f64, AnalysisError> {
        let p1 = self.probability_of(|b| b[i]);
        let p2 = self.probability_of(|b| b[j]);
        if p1 <= 0.0 || p2 <= 0.0 {
            return Err(AnalysisError::ZeroSingles(what));
        }
        Ok(self.probability_of(|b| b[i] && b[j]) / (p1 * p2))
    }

    pub fn g2_write_auto(&self) -> Result<f64, AnalysisError> {
        self.auto(0, 1, "write")
    }

    pub fn g2_read_auto(&self) -> Result<f64, AnalysisError> {
        self.auto(2, 3, "read")
    }

    /// √(g_oo · g_mm) from the exact autocorrelations.
    pub fn classical_bound(&self) -> Result<f64, AnalysisError> {
        Ok((self.g2_write_auto()? * self.g2_read_auto()?).sqrt())
    }

    /// Read click table conditioned on any write click.
    pub fn heralded_read(&self) -> ClickTable {
        let pw = self.p_write();
        let mut t = [0.0; 4];
        for (slot, v) in t.iter_mut().enumerate() {
            let (d1, d2) = (slot & 2 != 0, slot & 1 != 0);
            *v = self.probability_of(|b| (b[0] || b[1]) && b[2] == d1 && b[3] == d2) / pw;
        }
        ClickTable {
            p00: t[0],
            p01: t[1],
            p10: t[2],
            p11: t[3],
        }
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        if self.probabilities.iter().any(|&p| !(p >= 0.0)) {
            return Err("negative or NaN pattern probability".into());
        }
        let s = self.total();
        if (s - 1.0).abs() > 1e-9 {
            return Err(format!("pattern probabilities sum to {s}"));
        }
        Ok(())
    }
}
