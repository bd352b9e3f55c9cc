//! Simulation and analysis of heralded photon–phonon pair experiments.
//!
//! * [`quantum`]: truncated Fock-space and Gaussian state engines.
//! * [`protocol`]: write/read pulse protocol, heating model, outcome tables
//!   and Monte-Carlo sampling of detector time tags.
//! * [`tags`]: the `PTT1` binary time-tag format.
//! * [`analysis`]: coincidence tabulation and the g⁽²⁾,
//!   Cauchy–Schwarz, thermometry and fitting estimators.

pub mod analysis;
pub mod error;
pub mod protocol;
pub mod quantum;
pub mod tags;

pub use error::{AnalysisError, ConfigError, Error, FormatError, QuantumError, Result};
