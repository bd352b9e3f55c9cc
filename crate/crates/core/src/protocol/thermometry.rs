//! Sideband thermometry: alternating blue (Stokes) and red (anti-Stokes)
//! pulses on the thermal mechanical state, plus far-detuned pulses that only
//! register pump leakage.

use serde::Serialize;

use super::config::{ExperimentConfig, Pulse};
use super::sampler::sample_counts;
use super::table::with_growing_cutoff;
use crate::error::{AnalysisError, Error, QuantumError};
use crate::quantum::{
    required_truncation, split_click_probabilities, thermal_state, DetectorModel, Mode, SingleModeState,
    TwoModeFockState, LEAK_TOL,
};

const STREAM_BLUE: u64 = 1;
const STREAM_RED: u64 = 2;
const STREAM_LEAK_BLUE: u64 = 3;
const STREAM_LEAK_RED: u64 = 4;

/// Click probabilities per pulse (any detector).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SidebandRates {
    pub blue: f64,
    pub red: f64,
    /// Leakage-only click probability of a detuned pulse.
    pub leak: f64,
    /// Rates with dark counts and leakage removed.
    pub ideal_blue: f64,
    pub ideal_red: f64,
}

impl SidebandRates {
    pub fn ideal_asymmetry(&self) -> f64 {
        self.ideal_blue / self.ideal_red
    }
}

fn any_click(
    state: &TwoModeFockState,
    dets: &[DetectorModel; 2],
) -> f64 {
    let pops = state.marginal_populations(Mode::B);
    split_click_probabilities(&pops, &dets[0], &dets[1]).any_click()
}

/// Exact per-pulse click probabilities at occupation `n_base`.
pub fn sideband_rates(cfg: &ExperimentConfig) -> Result<SidebandRates, QuantumError> {
    let s = cfg.thermometry.strength;
    let noisy = cfg.detectors(Pulse::Thermometry);
    let ideal = cfg.ideal_detectors();
    let hint = required_truncation(cfg.heating.n_base, LEAK_TOL);
    let (blue, red) = with_growing_cutoff(hint, |n_max| {
        let mech = thermal_state(cfg.heating.n_base, n_max)?;
        let start = TwoModeFockState::product(&mech, &SingleModeState::vacuum(n_max))?;
        let blue = start.two_mode_squeeze(s.sqrt().asinh(), 0.0)?;
        let red = start.beam_splitter(s, 0.0)?;
        Ok((blue, red))
    })?;
    Ok(SidebandRates {
        blue: any_click(&blue, &noisy),
        red: any_click(&red, &noisy),
        leak: 1.0 - noisy[0].noise_silence() * noisy[1].noise_silence(),
        ideal_blue: any_click(&blue, &ideal),
        ideal_red: any_click(&red, &ideal),
    })
}

/// Raw counts of a thermometry run; each of the four pulse kinds is fired
/// `pulses` times.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThermometryRun {
    pub pulses: u64,
    pub blue_counts: u64,
    pub red_counts: u64,
    pub leak_blue_counts: u64,
    pub leak_red_counts: u64,
    pub expected: SidebandRates,
}

pub fn simulate_thermometry(
    cfg: &ExperimentConfig,
    pulses: u64,
    seed: u64,
) -> Result<ThermometryRun, Error> {
    if pulses == 0 {
        return Err(AnalysisError::NoTrials.into());
    }
    let expected = sideband_rates(cfg)?;
    let clicks = |p: f64, stream| sample_counts(&[1.0 - p, p], pulses, seed, stream)[1];
    Ok(ThermometryRun {
        pulses,
        blue_counts: clicks(expected.blue, STREAM_BLUE),
        red_counts: clicks(expected.red, STREAM_RED),
        leak_blue_counts: clicks(expected.leak, STREAM_LEAK_BLUE),
        leak_red_counts: clicks(expected.leak, STREAM_LEAK_RED),
        expected,
    })
}
