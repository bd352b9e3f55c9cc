//! Threshold (click / no-click) detection with efficiency, dark counts and
//! Poissonian pump leakage.

use serde::{Deserialize, Serialize};

use super::fock::TwoModeFockState;
use crate::error::QuantumError;

/// One threshold detector. `leak_mean` counts leaked pump photons reaching the
/// detector per pulse; they are registered with the same efficiency as signal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub efficiency: f64,
    pub dark_prob: f64,
    pub leak_mean: f64,
}

impl DetectorModel {
    pub fn new(efficiency: f64, dark_prob: f64, leak_mean: f64) -> Result<Self, QuantumError> {
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(QuantumError::InvalidParameter {
                name: "efficiency",
                value: efficiency,
                reason: "must lie in [0, 1]",
            });
        }
        if !(0.0..1.0).contains(&dark_prob) {
            return Err(QuantumError::InvalidParameter {
                name: "dark_prob",
                value: dark_prob,
                reason: "must lie in [0, 1)",
            });
        }
        if !(leak_mean >= 0.0) || !leak_mean.is_finite() {
            return Err(QuantumError::InvalidParameter {
                name: "leak_mean",
                value: leak_mean,
                reason: "must be finite and non-negative",
            });
        }
        Ok(Self {
            efficiency,
            dark_prob,
            leak_mean,
        })
    }

    /// Noise-free detector.
    pub fn ideal(efficiency: f64) -> Self {
        Self {
            efficiency,
            dark_prob: 0.0,
            leak_mean: 0.0,
        }
    }

    /// Probability that neither a dark count nor a leaked photon fires.
    pub fn noise_silence(&self) -> f64 {
        (1.0 - self.dark_prob) * (-self.efficiency * self.leak_mean).exp()
    }

    /// Probability of no click given `n` signal photons on this detector's mode.
    pub fn no_click(&self, n: usize) -> f64 {
        (1.0 - self.efficiency).powi(n as i32) * self.noise_silence()
    }

    /// Mean number of registered noise events (dark + leak).
    pub fn noise_click_probability(&self) -> f64 {
        1.0 - self.noise_silence()
    }
}

/// Joint click probabilities of two detectors; `p01` means the first detector
/// stayed silent while the second clicked.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClickTable {
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
}

impl ClickTable {
    pub fn sum(&self) -> f64 {
        self.p00 + self.p01 + self.p10 + self.p11
    }

    pub fn click_first(&self) -> f64 {
        self.p10 + self.p11
    }

    pub fn click_second(&self) -> f64 {
        self.p01 + self.p11
    }

    pub fn any_click(&self) -> f64 {
        1.0 - self.p00
    }

    /// P(1∩2) / (P(1) P(2)).
    pub fn g2(&self) -> f64 {
        self.p11 / (self.click_first() * self.click_second())
    }

    fn from_silences(both: f64, first: f64, second: f64) -> Self {
        Self {
            p00: both,
            p01: first - both,
            p10: second - both,
            p11: 1.0 - first - second + both,
        }
    }
}

/// Joint click table for detector `det_a` watching mode A and `det_b`
/// watching mode B.
pub fn click_probabilities(
    state: &TwoModeFockState,
    det_a: &DetectorModel,
    det_b: &DetectorModel,
) -> ClickTable {
    let joint = state.joint_populations();
    let d = state.dim();
    let silent_a: Vec<f64> = (0..d).map(|n| det_a.no_click(n)).collect();
    let silent_b: Vec<f64> = (0..d).map(|n| det_b.no_click(n)).collect();
    let mut both = 0.0;
    let mut only_a_silent = 0.0;
    let mut only_b_silent = 0.0;
    for a in 0..d {
        for b in 0..d {
            let p = joint[(a, b)];
            both += p * silent_a[a] * silent_b[b];
            only_a_silent += p * silent_a[a];
            only_b_silent += p * silent_b[b];
        }
    }
    ClickTable::from_silences(both, only_a_silent, only_b_silent)
}

/// Measurement elements for one mode shared between two detectors (each photon
/// reaches detector 1 with probability η₁ and detector 2 with η₂): for `n`
/// photons returns `[P(00|n), P(01|n), P(10|n), P(11|n)]`.
pub fn split_click_povm(det1: &DetectorModel, det2: &DetectorModel, n: usize) -> [f64; 4] {
    let rest = (1.0 - det1.efficiency - det2.efficiency).max(0.0);
    let both = rest.powi(n as i32) * det1.noise_silence() * det2.noise_silence();
    let t = ClickTable::from_silences(both, det1.no_click(n), det2.no_click(n));
    [t.p00, t.p01, t.p10, t.p11]
}

/// Click table of two detectors fed from one mode with number distribution
/// `populations`.
pub fn split_click_probabilities(
    populations: &[f64],
    det1: &DetectorModel,
    det2: &DetectorModel,
) -> ClickTable {
    let mut acc = [0.0; 4];
    for (n, &p) in populations.iter().enumerate() {
        let e = split_click_povm(det1, det2, n);
        for k in 0..4 {
            acc[k] += p * e[k];
        }
    }
    ClickTable {
        p00: acc[0],
        p01: acc[1],
        p10: acc[2],
        p11: acc[3],
    }
}
