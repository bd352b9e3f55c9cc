//! Write/read pulse protocol: configuration, heating, exact outcome tables,
//! sampling of detector tags, and the auxiliary pump-probe and thermometry
//! sequences.

pub mod calibration;
pub mod config;
pub mod heating;
pub mod pump_probe;
pub mod sampler;
pub mod table;
pub mod thermometry;

pub use calibration::{calibrate_heating, Calibration, TargetPoint};
pub use config::{fnv1a64, ExperimentConfig, Pulse};
pub use heating::{heating_occupation, heating_profile};
pub use pump_probe::{simulate_pump_probe, PumpProbePoint};
pub use sampler::{sample_trials, SampleOutput};
pub use table::{
    build_outcome_table, pattern_bits, pattern_index, HeraldBranch, OutcomeTable, PulsePairModel,
};
pub use thermometry::{sideband_rates, simulate_thermometry, SidebandRates, ThermometryRun};
