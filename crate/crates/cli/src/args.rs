use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "phononherald", version, about = "Simulate and analyze heralded photon-phonon pair experiments")]
pub struct Cli {
    /// Worker threads for sampling and analysis (outputs do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

/// Config overrides applied before hashing.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Total pulse pairs, split evenly over the delays.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Write-read delays in ns, comma separated and ascending.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub delta_t_ns: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Sideband thermometry rates and occupancy.
    Fig2,
    /// Cross-correlation against trial offset with the classical bound.
    Fig3b,
    /// Cross-correlation and bound against write-read delay.
    Fig3c,
    /// Pump-probe heating series with exponential fits.
    M3,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3b => "fig3b",
            Figure::Fig3c => "fig3c",
            Figure::M3 => "m3",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a tag stream for every configured delay.
    Simulate {
        /// Config JSON; the shipped default parameter set when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Tag stream to write.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Tabulate a tag stream and write correlation tables and verdicts.
    Analyze {
        /// Tag stream to read.
        stream: PathBuf,
        /// Config the stream was simulated with; defaults to the
        /// `<stream>.config.json` sidecar.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Trim the read window to this many ns (e.g. 30).
        #[arg(long)]
        read_window_ns: Option<f64>,
        /// Also estimate g2_om for trial offsets 1..=N.
        #[arg(long)]
        delta_n: Option<u32>,
    },
    /// Simulate alternating blue/red pulses and report the occupancy.
    Thermometry {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Report JSON to write.
        #[arg(long)]
        out: PathBuf,
        /// Pulses of each kind.
        #[arg(long, default_value_t = 1_000_000)]
        pulses: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write CSV series for one figure. For fig3c the configured trial count
    /// applies to every delay.
    Reproduce {
        #[arg(long, value_enum)]
        figure: Figure,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Largest trial offset for fig3b.
        #[arg(long, default_value_t = 10)]
        delta_n: u32,
        #[arg(long)]
        read_window_ns: Option<f64>,
        /// Pulses of each kind for fig2.
        #[arg(long, default_value_t = 1_000_000)]
        pulses: u64,
    },
    /// Fit the heating amplitude to a target g2_om(δt) curve.
    CalibrateHeating {
        #[arg(long)]
        config: Option<PathBuf>,
        /// CSV with columns delta_t_ns,g2; g2_om(100 ns) = 8.0 when omitted.
        #[arg(long)]
        target: Option<PathBuf>,
        /// Calibrated config JSON to write.
        #[arg(long)]
        out: PathBuf,
    },
}
