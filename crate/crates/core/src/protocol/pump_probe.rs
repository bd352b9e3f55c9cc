//! Expected read-window count rates after a strong pump pulse, used to
//! characterize absorption heating.

use serde::Serialize;

use super::config::{ExperimentConfig, Heating};
use super::heating::heating_occupation;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PumpProbePoint {
    pub delta_t_ns: f64,
    pub occupation: f64,
    /// Expected clicks per probe pulse, summed over both detectors.
    pub rate: f64,
}

/// C_R(δt) = α · n(δt) + C_leak with α the detected anti-Stokes photons per
/// unit occupation and C_leak the detected pump leakage of one read pulse.
/// `pump_heat_amplitude` replaces the write-pulse heating amplitude.
pub fn simulate_pump_probe(
    cfg: &ExperimentConfig,
    pump_heat_amplitude: f64,
    grid_ns: &[f64],
) -> Vec<PumpProbePoint> {
    let [e1, e2] = cfg.detector_efficiencies();
    let alpha = (e1 + e2) * cfg.protocol.eps_read;
    let leak: f64 = cfg.detected_leak(cfg.protocol.read_energy_fj).iter().sum();
    let heating = Heating {
        a_heat: pump_heat_amplitude,
        ..cfg.heating.clone()
    };
    grid_ns
        .iter()
        .map(|&dt| {
            let n = heating_occupation(dt, &heating);
            PumpProbePoint {
                delta_t_ns: dt,
                occupation: n,
                rate: alpha * n + leak,
            }
        })
        .collect()
}
