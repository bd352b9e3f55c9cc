use thiserror::Error;

/// Failures of the Fock/Gaussian state engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("truncation-unsafe state: top Fock level of mode {mode} holds population {population:.3e} (limit {limit:.1e}) at n_max = {n_max}")]
    TruncationUnsafe {
        mode: char,
        population: f64,
        limit: f64,
        n_max: usize,
    },
    #[error("Fock level {n} outside the truncated space 0..={n_max}")]
    LevelOutOfRange { n: usize, n_max: usize },
    #[error("mean occupation {mean:.3e} of mode {mode} is below the correlation floor")]
    UndefinedCorrelation { mode: char, mean: f64 },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("truncation mismatch: {left} vs {right}")]
    TruncationMismatch { left: usize, right: usize },
    #[error("operation {0} is not Gaussian")]
    NonGaussian(&'static str),
}

/// Configuration file and schema violations. `path` is the JSON field path.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("config parse error at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
}

impl ConfigError {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Malformed or inconsistent tag-stream data.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("bad magic {found:?}, expected \"PTT1\"")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("truncated file: {0}")]
    Truncated(String),
    #[error("record {index} (byte offset {offset}): {reason}")]
    BadRecord {
        index: u64,
        offset: u64,
        reason: String,
    },
    #[error("config hash mismatch: stream {stream:#018x}, config {config:#018x}")]
    HashMismatch { stream: u64, config: u64 },
    #[error("stream does not match the trial layout: {0}")]
    LayoutMismatch(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FormatError {
    fn from(e: std::io::Error) -> Self {
        FormatError::Io(e.to_string())
    }
}

/// Estimator failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("no trials (T = 0)")]
    NoTrials,
    #[error("event count {events} exceeds trial count {trials}")]
    CountsExceedTrials { events: u64, trials: u64 },
    #[error("zero single-event probability for {0}; correlation undefined")]
    ZeroSingles(&'static str),
    #[error("trial offset {delta_n} leaves no trial pairs in a block of {trials}")]
    NoPairs { delta_n: i64, trials: u64 },
    #[error("both autocorrelations have zero coincidences; classical bound undefined")]
    DegenerateBound,
    #[error("non-positive sideband denominator (blue rate {blue:.3e} <= red rate {red:.3e})")]
    NonPositiveDenominator { blue: f64, red: f64 },
    #[error("fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("time axis must be strictly ascending")]
    Unsorted,
    #[error("fit did not converge: {0}")]
    NonConvergence(String),
    #[error("invalid input {name} = {value}: {reason}")]
    InvalidInput {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("no root in [0, 1]: {0}")]
    NoRoot(String),
    #[error("delay setting {0} not present in the table")]
    UnknownSetting(usize),
}

/// Umbrella error for callers that drive several subsystems.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
