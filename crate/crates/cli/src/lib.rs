//! Command-line layer: argument parsing, run manifests, and the simulation
//! and analysis pipelines behind each subcommand.

pub mod args;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod run;

pub use error::{exit, CliError};
