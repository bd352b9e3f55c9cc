//! Simulation and analysis pipelines shared by the subcommands.

use rayon::prelude::*;
use serde::Serialize;

use phononherald::analysis::{
    analyze, fit_exponential, g2_cross_estimate, sideband_occupancy_from_counts, tabulate,
    AnalysisOptions, AnalysisReport, CorrelationEstimate, DelayResult, ExponentialFit, FitModel,
    Occupancy, RateCount,
};
use phononherald::protocol::{
    build_outcome_table, heating_occupation, sample_trials, simulate_pump_probe,
    simulate_thermometry, ExperimentConfig, OutcomeTable, PumpProbePoint, SampleOutput,
    ThermometryRun,
};
use phononherald::tags::TrialLayout;
use phononherald::{AnalysisError, Error};

/// Default delay sweep for the storage-time figure (ns).
pub const FIG3C_DELAYS_NS: [f64; 8] = [100.0, 200.0, 300.0, 500.0, 750.0, 1000.0, 1250.0, 1500.0];

/// The pump of the heating measurement carries five write-pulse energies.
pub const M3_PUMP_SCALE: f64 = 5.0;

pub struct Simulation {
    pub layout: TrialLayout,
    pub tables: Vec<OutcomeTable>,
    pub sample: SampleOutput,
}

pub fn outcome_tables(cfg: &ExperimentConfig) -> Result<Vec<OutcomeTable>, Error> {
    cfg.protocol
        .delta_t_list
        .par_iter()
        .map(|&dt| build_outcome_table(cfg, dt).map_err(Error::from))
        .collect()
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<Simulation, Error> {
    let layout = TrialLayout::from_config(cfg);
    let tables = outcome_tables(cfg)?;
    for t in &tables {
        log::info!(
            "δt = {} ns: n_max {}, added occupation {:.4}, P(W) {:.3e}, P(R) {:.3e}",
            t.delta_t_ns,
            t.n_max,
            t.added_occupation,
            t.p_write(),
            t.p_read()
        );
    }
    let sample = sample_trials(&layout, &tables, cfg.seed, cfg.hash());
    log::info!("sampled {} trials, {} records", layout.total_trials(), sample.stream.records.len());
    Ok(Simulation {
        layout,
        tables,
        sample,
    })
}

pub fn simulate_and_analyze(
    cfg: &ExperimentConfig,
    opts: &AnalysisOptions,
) -> Result<(Simulation, AnalysisReport), Error> {
    let sim = simulate(cfg)?;
    let table = tabulate(&sim.sample.stream, &sim.layout, opts.read_window_ns)?;
    let report = analyze(&table, opts);
    Ok((sim, report))
}

#[derive(Clone, Debug, Serialize)]
pub struct ThermometryReport {
    pub n_base: f64,
    pub run: ThermometryRun,
    pub rate_blue: f64,
    pub rate_red: f64,
    pub ideal_asymmetry: f64,
    /// Leak-corrected occupancy.
    pub occupancy: Occupancy,
    /// Occupancy without leak subtraction; absent when its denominator is not
    /// positive.
    pub occupancy_raw: Option<Occupancy>,
}

pub fn thermometry(cfg: &ExperimentConfig, pulses: u64, seed: u64) -> Result<ThermometryReport, Error> {
    let run = simulate_thermometry(cfg, pulses, seed)?;
    let rc = |counts| RateCount { counts, pulses };
    let occupancy = sideband_occupancy_from_counts(
        rc(run.red_counts),
        rc(run.blue_counts),
        Some(rc(run.leak_red_counts)),
        Some(rc(run.leak_blue_counts)),
    )?;
    let occupancy_raw = sideband_occupancy_from_counts(rc(run.red_counts), rc(run.blue_counts), None, None).ok();
    Ok(ThermometryReport {
        n_base: cfg.heating.n_base,
        rate_blue: rc(run.blue_counts).rate(),
        rate_red: rc(run.red_counts).rate(),
        ideal_asymmetry: run.expected.ideal_asymmetry(),
        occupancy,
        occupancy_raw,
        run,
    })
}

impl ThermometryReport {
    pub fn csv(&self) -> String {
        let raw = self.occupancy_raw.map_or(f64::NAN, |o| o.value);
        format!(
            "n_base,pulses,blue_counts,red_counts,leak_blue_counts,leak_red_counts,rate_blue,rate_red,ideal_asymmetry,n_th,n_ci_minus,n_ci_plus,limit_only,n_th_raw\n\
             {},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            self.n_base,
            self.run.pulses,
            self.run.blue_counts,
            self.run.red_counts,
            self.run.leak_blue_counts,
            self.run.leak_red_counts,
            self.rate_blue,
            self.rate_red,
            self.ideal_asymmetry,
            self.occupancy.value,
            self.occupancy.sigma_minus,
            self.occupancy.sigma_plus,
            self.occupancy.limit_only,
            raw
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaNPoint {
    pub delta_n: i64,
    pub estimate: CorrelationEstimate,
}

/// g⁽²⁾_om against trial offset at the first configured delay.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaNSweep {
    pub delta_t_ns: f64,
    pub points: Vec<DeltaNPoint>,
    pub setting: DelayResult,
    pub offset_pooled: Option<CorrelationEstimate>,
}

pub fn delta_n_sweep(
    cfg: &ExperimentConfig,
    max_delta_n: u32,
    read_window_ns: Option<f64>,
) -> Result<DeltaNSweep, Error> {
    let mut cfg = cfg.clone();
    cfg.protocol.delta_t_list.truncate(1);
    let sim = simulate(&cfg)?;
    let table = tabulate(&sim.sample.stream, &sim.layout, read_window_ns)?;
    let report = analyze(
        &table,
        &AnalysisOptions {
            read_window_ns,
            delta_n: Some(max_delta_n),
        },
    );
    let d = max_delta_n as i64;
    let points = (-d..=d)
        .map(|dn| DeltaNPoint {
            delta_n: dn,
            estimate: g2_cross_estimate(&table, 0, dn).unwrap_or_else(|_| CorrelationEstimate::undefined()),
        })
        .collect();
    Ok(DeltaNSweep {
        delta_t_ns: cfg.protocol.delta_t_list[0],
        points,
        setting: report.settings[0].clone(),
        offset_pooled: report.offset_pooled,
    })
}

impl DeltaNSweep {
    pub fn csv(&self) -> String {
        let b = &self.setting.bound;
        let mut out = String::from("delta_n,g2_om,ci_minus,ci_plus,bound,bound_ci_minus,bound_ci_plus\n");
        for p in &self.points {
            let e = &p.estimate;
            out += &format!(
                "{},{},{},{},{},{},{}\n",
                p.delta_n, e.value, e.sigma_minus, e.sigma_plus, b.value, b.sigma_minus, b.sigma_plus
            );
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StoragePoint {
    pub delta_t_ns: f64,
    pub occupation: f64,
    /// Exact table-implied values.
    pub g2_om_model: f64,
    pub bound_model: f64,
    /// Estimates from the sampled run.
    pub setting: DelayResult,
}

/// g⁽²⁾_om and its classical bound against write-read delay.
pub fn storage_sweep(cfg: &ExperimentConfig, read_window_ns: Option<f64>) -> Result<Vec<StoragePoint>, Error> {
    let opts = AnalysisOptions {
        read_window_ns,
        delta_n: None,
    };
    let (sim, report) = simulate_and_analyze(cfg, &opts)?;
    sim.tables
        .iter()
        .zip(report.settings)
        .map(|(t, setting)| {
            Ok(StoragePoint {
                delta_t_ns: t.delta_t_ns,
                occupation: heating_occupation(t.delta_t_ns, &cfg.heating),
                g2_om_model: t.g2_cross()?,
                bound_model: t.classical_bound()?,
                setting,
            })
        })
        .collect()
}

pub fn storage_csv(points: &[StoragePoint]) -> String {
    let mut out = String::from(
        "delta_t_ns,occupation,g2_om_model,bound_model,g2_om,ci_minus,ci_plus,bound,bound_ci_minus,bound_ci_plus,violated\n",
    );
    for p in points {
        let (c, b) = (&p.setting.cross, &p.setting.bound);
        out += &format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            p.delta_t_ns,
            p.occupation,
            p.g2_om_model,
            p.bound_model,
            c.value,
            c.sigma_minus,
            c.sigma_plus,
            b.value,
            b.sigma_minus,
            b.sigma_plus,
            p.setting.verdict.is_some_and(|v| v.violated)
        );
    }
    out
}

/// Pump-probe heating series with its two exponential fits (times in μs).
#[derive(Clone, Debug, Serialize)]
pub struct HeatingResponse {
    pub pump_heat_amplitude: f64,
    pub series: Vec<PumpProbePoint>,
    pub decay: ExponentialFit,
    pub rise: ExponentialFit,
}

const M3_RISE_END_NS: f64 = 2_000.0;
const M3_DECAY_START_NS: f64 = 3_000.0;
const M3_DECAY_END_NS: f64 = 150_000.0;

fn m3_grid() -> Vec<f64> {
    let rise = (0..=40).map(|i| i as f64 * M3_RISE_END_NS / 40.0);
    let decay = (0..60).map(|i| {
        let f = i as f64 / 59.0;
        M3_DECAY_START_NS * (M3_DECAY_END_NS / M3_DECAY_START_NS).powf(f)
    });
    rise.chain(decay).collect()
}

/// The long-time decay is fitted first on delays well past the rise; the
/// rise is then fitted on the early series with that decay divided out.
pub fn heating_response(cfg: &ExperimentConfig) -> Result<HeatingResponse, AnalysisError> {
    let amp = M3_PUMP_SCALE * cfg.heating.a_heat;
    let series = simulate_pump_probe(cfg, amp, &m3_grid());
    let (late, early): (Vec<&PumpProbePoint>, Vec<&PumpProbePoint>) = series.iter().partition(|p| p.delta_t_ns >= M3_DECAY_START_NS);
    let t_late: Vec<f64> = late.iter().map(|p| p.delta_t_ns * 1e-3).collect();
    let y_late: Vec<f64> = late.iter().map(|p| p.rate).collect();
    let decay = fit_exponential(&t_late, &y_late, FitModel::Decay)?;

    let t_early: Vec<f64> = early.iter().map(|p| p.delta_t_ns * 1e-3).collect();
    let y_early: Vec<f64> = early
        .iter()
        .zip(&t_early)
        .map(|(p, &t)| decay.offset + (p.rate - decay.offset) * (t / decay.time_constant).exp())
        .collect();
    let rise = fit_exponential(&t_early, &y_early, FitModel::SaturatingRise)?;
    Ok(HeatingResponse {
        pump_heat_amplitude: amp,
        series,
        decay,
        rise,
    })
}

impl HeatingResponse {
    pub fn csv(&self) -> String {
        let mut out = String::from("delta_t_ns,occupation,rate\n");
        for p in &self.series {
            out += &format!("{},{},{}\n", p.delta_t_ns, p.occupation, p.rate);
        }
        out
    }
}
