//! Two-mode quantum state engine: truncated Fock-space density operators,
//! Gaussian covariance matrices, and threshold detection.

pub mod detection;
pub mod fock;
pub mod gaussian;

pub use detection::{
    click_probabilities, split_click_povm, split_click_probabilities, ClickTable, DetectorModel,
};
pub use fock::{
    fock_state, required_truncation, thermal_state, Mode, SingleModeState, TwoModeFockState,
    DEFAULT_N_MAX, LEAK_TOL, N_FLOOR, TRACE_TOL,
};
pub use gaussian::{gaussian_click_stats, CircuitOp, CovarianceState, GaussianClickStats};
