//! Subcommand implementations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::json;

use phononherald::analysis::{analyze, encode, read_tagstream, tabulate, AnalysisOptions};
use phononherald::protocol::{calibrate_heating, ExperimentConfig, TargetPoint};
use phononherald::tags::TrialLayout;
use phononherald::FormatError;

use crate::args::{Cli, Command, Figure, Overrides};
use crate::error::CliError;
use crate::manifest::{hash_hex, sidecar, ManifestBuilder};
use crate::pipeline;

/// The shipped parameter set, with the heating amplitude calibrated to
/// g⁽²⁾_om(100 ns) = 8.0.
pub const PAPER_DEFAULT_JSON: &str = include_str!("../../../configs/paper_default.json");

pub fn paper_default() -> ExperimentConfig {
    ExperimentConfig::from_json_str(PAPER_DEFAULT_JSON).expect("shipped config is valid")
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, CliError> {
    match path {
        Some(p) => Ok(ExperimentConfig::load(p)?),
        None => Ok(paper_default()),
    }
}

fn apply_overrides(
    cfg: &mut ExperimentConfig,
    o: &Overrides,
) -> Result<BTreeMap<String, serde_json::Value>, CliError> {
    let mut applied = BTreeMap::new();
    if let Some(seed) = o.seed {
        cfg.seed = seed;
        applied.insert("seed".into(), json!(seed));
    }
    if let Some(trials) = o.trials {
        cfg.protocol.trials = trials;
        applied.insert("protocol.trials".into(), json!(trials));
    }
    if let Some(d) = &o.delta_t_ns {
        cfg.protocol.delta_t_list = d.clone();
        applied.insert("protocol.delta_t_list".into(), json!(d));
    }
    cfg.validate()?;
    Ok(applied)
}

fn record_config(mb: &mut ManifestBuilder, path: Option<&Path>) {
    if let Some(p) = path {
        mb.input(p);
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialized: {e}");
        }
    }
    match cli.command {
        Command::Simulate {
            config,
            out,
            overrides,
        } => simulate(config.as_deref(), &out, &overrides),
        Command::Analyze {
            stream,
            config,
            out,
            read_window_ns,
            delta_n,
        } => analyze_cmd(&stream, config, &out, read_window_ns, delta_n),
        Command::Thermometry {
            config,
            out,
            pulses,
            seed,
        } => thermometry(config.as_deref(), &out, pulses, seed),
        Command::Reproduce {
            figure,
            config,
            out,
            overrides,
            delta_n,
            read_window_ns,
            pulses,
        } => reproduce(figure, config.as_deref(), &out, &overrides, delta_n, read_window_ns, pulses),
        Command::CalibrateHeating { config, target, out } => {
            calibrate(config.as_deref(), target.as_deref(), &out)
        }
    }
}

fn simulate(config: Option<&Path>, out: &Path, overrides: &Overrides) -> Result<(), CliError> {
    let mut cfg = load_config(config)?;
    let applied = apply_overrides(&mut cfg, overrides)?;
    let mut mb = ManifestBuilder::start("simulate", cfg.hash(), cfg.seed).overrides(applied);
    record_config(&mut mb, config);
    let sim = pipeline::simulate(&cfg)?;
    mb.output(out, &encode(&sim.sample.stream))?;
    mb.output(&sidecar(out, "config.json"), cfg.to_pretty_json().as_bytes())?;
    mb.finish(&sidecar(out, "manifest.json"))?;
    println!(
        "wrote {} records over {} trials to {} (config {})",
        sim.sample.stream.records.len(),
        sim.layout.total_trials(),
        out.display(),
        hash_hex(cfg.hash())
    );
    Ok(())
}

fn analyze_cmd(
    stream_path: &Path,
    config: Option<PathBuf>,
    out: &Path,
    read_window_ns: Option<f64>,
    delta_n: Option<u32>,
) -> Result<(), CliError> {
    let stream = read_tagstream(stream_path)?;
    let config_path = config.unwrap_or_else(|| sidecar(stream_path, "config.json"));
    let cfg = ExperimentConfig::load(&config_path)?;
    if stream.header.config_hash != cfg.hash() {
        return Err(FormatError::HashMismatch {
            stream: stream.header.config_hash,
            config: cfg.hash(),
        }
        .into());
    }
    let mut mb = ManifestBuilder::start("analyze", cfg.hash(), cfg.seed).overrides(
        [
            ("read_window_ns", read_window_ns.map(|v| json!(v))),
            ("delta_n", delta_n.map(|v| json!(v))),
        ]
        .into_iter()
        .filter_map(|(k, v)| Some((k.to_owned(), v?)))
        .collect(),
    );
    mb.input(stream_path);
    mb.input(&config_path);

    let layout = TrialLayout::from_config(&cfg);
    let table = tabulate(&stream, &layout, read_window_ns)?;
    let opts = AnalysisOptions {
        read_window_ns,
        delta_n,
    };
    let report = analyze(&table, &opts);
    mb.output(&out.join("correlations.csv"), report.csv().as_bytes())?;
    mb.output(&out.join("summary.json"), report.to_json().as_bytes())?;
    if delta_n.is_some() {
        mb.output(&out.join("delta_n_sweep.csv"), report.offsets_csv().as_bytes())?;
    }
    mb.finish(&out.join("manifest.json"))?;

    for s in &report.settings {
        let verdict = match s.verdict {
            Some(v) if v.violated => format!("violated (margin {:.2})", v.margin),
            Some(v) => format!("not violated (margin {:.2})", v.margin),
            None => "undefined".into(),
        };
        println!(
            "δt = {} ns: g2_om = {:.3} -{:.3}/+{:.3}, bound = {:.3} -{:.3}/+{:.3}, {verdict}",
            s.delta_t_ns,
            s.cross.value,
            s.cross.sigma_minus,
            s.cross.sigma_plus,
            s.bound.value,
            s.bound.sigma_minus,
            s.bound.sigma_plus
        );
        for e in &s.errors {
            log::warn!("δt = {} ns: {e}", s.delta_t_ns);
        }
    }
    if let Some(p) = report.offset_pooled {
        println!(
            "Δn ≠ 0 pooled: g2_om = {:.3} -{:.3}/+{:.3}",
            p.value, p.sigma_minus, p.sigma_plus
        );
    }
    if report.is_empty() {
        return Err(CliError::EmptyAnalysis);
    }
    Ok(())
}

fn thermometry(config: Option<&Path>, out: &Path, pulses: u64, seed: Option<u64>) -> Result<(), CliError> {
    if pulses == 0 {
        return Err(CliError::Usage("--pulses must be at least 1".into()));
    }
    let mut cfg = load_config(config)?;
    let applied = apply_overrides(
        &mut cfg,
        &Overrides {
            seed,
            ..Overrides::default()
        },
    )?;
    let mut mb = ManifestBuilder::start("thermometry", cfg.hash(), cfg.seed).overrides(applied);
    record_config(&mut mb, config);
    let report = pipeline::thermometry(&cfg, pulses, cfg.seed)?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    mb.output(out, text.as_bytes())?;
    mb.finish(&sidecar(out, "manifest.json"))?;
    let o = &report.occupancy;
    if o.limit_only {
        println!("n_th < {:.4} (68 % upper limit, leak-corrected)", o.value + o.sigma_plus);
    } else {
        println!(
            "n_th = {:.4} -{:.4}/+{:.4} (leak-corrected), ideal asymmetry {:.1}",
            o.value, o.sigma_minus, o.sigma_plus, report.ideal_asymmetry
        );
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> Vec<u8> {
    serde_json::to_string_pretty(v).expect("serializes").into_bytes()
}

fn reproduce(
    figure: Figure,
    config: Option<&Path>,
    out: &Path,
    overrides: &Overrides,
    delta_n: u32,
    read_window_ns: Option<f64>,
    pulses: u64,
) -> Result<(), CliError> {
    let mut cfg = load_config(config)?;
    if figure == Figure::Fig3c && overrides.delta_t_ns.is_none() {
        cfg.protocol.delta_t_list = pipeline::FIG3C_DELAYS_NS.to_vec();
    }
    let applied = apply_overrides(&mut cfg, overrides)?;
    if figure == Figure::Fig3c {
        // each delay gets the configured number of pulse pairs
        let settings = cfg.protocol.delta_t_list.len() as u64;
        cfg.protocol.trials = cfg.protocol.trials.saturating_mul(settings);
    }
    let name = figure.name();
    let mut mb = ManifestBuilder::start(&format!("reproduce {name}"), cfg.hash(), cfg.seed).overrides(applied);
    record_config(&mut mb, config);
    match figure {
        Figure::Fig2 => {
            if pulses == 0 {
                return Err(CliError::Usage("--pulses must be at least 1".into()));
            }
            let r = pipeline::thermometry(&cfg, pulses, cfg.seed)?;
            mb.output(&out.join("fig2_thermometry.csv"), r.csv().as_bytes())?;
            mb.output(&out.join("fig2_summary.json"), &to_json(&r))?;
            println!(
                "ideal asymmetry {:.1}, n_th = {:.4} -{:.4}/+{:.4}",
                r.ideal_asymmetry, r.occupancy.value, r.occupancy.sigma_minus, r.occupancy.sigma_plus
            );
        }
        Figure::Fig3b => {
            let s = pipeline::delta_n_sweep(&cfg, delta_n, read_window_ns)?;
            mb.output(&out.join("fig3b_delta_n.csv"), s.csv().as_bytes())?;
            mb.output(&out.join("fig3b_summary.json"), &to_json(&s))?;
            let c = &s.setting.cross;
            println!(
                "δt = {} ns: g2_om(0) = {:.3} -{:.3}/+{:.3}, bound {:.3} +{:.3}",
                s.delta_t_ns, c.value, c.sigma_minus, c.sigma_plus, s.setting.bound.value, s.setting.bound.sigma_plus
            );
        }
        Figure::Fig3c => {
            let pts = pipeline::storage_sweep(&cfg, read_window_ns)?;
            mb.output(&out.join("fig3c_storage.csv"), pipeline::storage_csv(&pts).as_bytes())?;
            mb.output(&out.join("fig3c_summary.json"), &to_json(&pts))?;
            for p in &pts {
                println!(
                    "δt = {} ns: model g2_om {:.3}, bound {:.3}",
                    p.delta_t_ns, p.g2_om_model, p.bound_model
                );
            }
        }
        Figure::M3 => {
            let r = pipeline::heating_response(&cfg)?;
            mb.output(&out.join("m3_series.csv"), r.csv().as_bytes())?;
            mb.output(&out.join("m3_fits.json"), &to_json(&r))?;
            println!(
                "decay T = {:.3} μs, rise τ = {:.4} μs",
                r.decay.time_constant, r.rise.time_constant
            );
        }
    }
    mb.finish(&out.join(format!("{name}.manifest.json")))?;
    Ok(())
}

fn read_target(path: &Path) -> Result<Vec<TargetPoint>, CliError> {
    let bad = |e: &dyn std::fmt::Display| CliError::Usage(format!("target {}: {e}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(&e))?;
    reader
        .deserialize()
        .collect::<Result<Vec<TargetPoint>, _>>()
        .map_err(|e| bad(&e))
}

fn calibrate(config: Option<&Path>, target: Option<&Path>, out: &Path) -> Result<(), CliError> {
    let mut cfg = load_config(config)?;
    let points = match target {
        Some(p) => read_target(p)?,
        None => vec![TargetPoint {
            delta_t_ns: 100.0,
            g2: 8.0,
        }],
    };
    let mut mb = ManifestBuilder::start("calibrate-heating", cfg.hash(), cfg.seed);
    record_config(&mut mb, config);
    if let Some(p) = target {
        mb.input(p);
    }
    let cal = calibrate_heating(&cfg, &points)?;
    cfg.heating.a_heat = cal.a_heat;
    let mut text = cfg.to_pretty_json();
    text.push('\n');
    mb.output(out, text.as_bytes())?;
    mb.output(&sidecar(out, "calibration.json"), &to_json(&json!({
        "target": points,
        "calibration": cal,
    })))?;
    mb.finish(&sidecar(out, "manifest.json"))?;
    println!(
        "a_heat = {} (relative RMS {:.2e}, {} evaluations)",
        cal.a_heat, cal.relative_rms, cal.evaluations
    );
    Ok(())
}
