//! Tag-stream ingestion and the statistical estimators.

pub mod binomial;
pub mod bound;
pub mod correlation;
pub mod fit;
pub mod format;
pub mod heralded;
pub mod report;
pub mod sideband;
pub mod tabulate;

pub use binomial::{binomial_ci, posterior_cdf, BinomialCi};
pub use bound::{
    cauchy_schwarz_test, classical_bound, naive_bound, AutocorrelationInput, Verdict,
};
pub use correlation::{
    correlation_from_counts, g2_auto_estimate, g2_cross_estimate, CorrelationEstimate,
};
pub use fit::{fit_exponential, ExponentialFit, FitModel};
pub use format::{decode, encode, read_tagstream, write_tagstream};
pub use heralded::{fock_fidelity, heralded_autocorr, FockPopulations, HeraldedAutocorr};
pub use report::{analyze, AnalysisOptions, AnalysisReport, DelayResult, OffsetResult};
pub use sideband::{
    sideband_occupancy, sideband_occupancy_from_counts, Occupancy, RateCount,
};
pub use tabulate::{tabulate, EventCounts, PairCounts, TrialTable};
