use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phononherald::analysis::{
    analyze, binomial_ci, classical_bound, decode, encode, g2_auto_estimate, g2_cross_estimate,
    heralded_autocorr, naive_bound, read_tagstream, sideband_occupancy_from_counts, tabulate,
    write_tagstream, AnalysisOptions, AutocorrelationInput, CorrelationEstimate, RateCount,
    TrialTable,
};
use phononherald::protocol::{build_outcome_table, sample_trials, simulate_thermometry, ExperimentConfig, OutcomeTable};
use phononherald::quantum::{thermal_state, Mode, TwoModeFockState};
use phononherald::tags::{PulseLabel, StreamHeader, TagRecord, TagStream, TrialLayout, FORMAT_VERSION};

/// Lossless chain with strong pairing, so that every estimator sees
/// thousands of coincidences in 10⁵ trials.
fn high_rate(delays: &[f64], trials: u64, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.chain.eta_path1 = 1.0;
    cfg.chain.eta_path2 = 1.0;
    cfg.chain.eta_qe1 = 1.0;
    cfg.chain.eta_qe2 = 1.0;
    cfg.protocol.p_pair = 0.1;
    cfg.protocol.eps_read = 0.5;
    cfg.protocol.delta_t_list = delays.to_vec();
    cfg.protocol.trials = trials;
    cfg.seed = seed;
    cfg.validate().unwrap();
    cfg
}

fn tables(cfg: &ExperimentConfig) -> Vec<OutcomeTable> {
    cfg.protocol
        .delta_t_list
        .iter()
        .map(|&dt| build_outcome_table(cfg, dt).unwrap())
        .collect()
}

fn sampled_table(cfg: &ExperimentConfig, tables: &[OutcomeTable]) -> TrialTable {
    let layout = TrialLayout::from_config(cfg);
    let out = sample_trials(&layout, tables, cfg.seed, cfg.hash());
    tabulate(&out.stream, &layout, None).unwrap()
}

/// Distance from `truth` in units of the interval half-width facing it.
fn pull(e: &CorrelationEstimate, truth: f64) -> f64 {
    let d = truth - e.value;
    let w = if d >= 0.0 { e.sigma_plus } else { e.sigma_minus };
    d.abs() / w
}

#[test]
fn tabulation_recovers_sampled_patterns_through_a_file() {
    let cfg = high_rate(&[100.0, 500.0, 1500.0], 90_001, 3);
    let layout = TrialLayout::from_config(&cfg);
    let out = sample_trials(&layout, &tables(&cfg), cfg.seed, cfg.hash());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.ptt");
    write_tagstream(&path, &out.stream).unwrap();
    let back = read_tagstream(&path).unwrap();
    assert_eq!(back, out.stream);
    let table = tabulate(&back, &layout, None).unwrap();
    for b in 0..layout.blocks.len() {
        assert_eq!(table.pattern_counts(b), out.pattern_counts[b], "block {b}");
    }
}

#[test]
fn trimmed_read_window_drops_only_late_read_clicks() {
    let cfg = high_rate(&[100.0], 50_000, 4);
    let layout = TrialLayout::from_config(&cfg);
    let out = sample_trials(&layout, &tables(&cfg), cfg.seed, cfg.hash());
    let full = tabulate(&out.stream, &layout, None).unwrap().block_counts(0);
    let trimmed = tabulate(&out.stream, &layout, Some(30.0)).unwrap().block_counts(0);
    assert_eq!(full.write_any, trimmed.write_any);
    assert_eq!(full.w1w2, trimmed.w1w2);
    assert!(trimmed.read_any < full.read_any);
    // uniform placement keeps about 30/55 of the read clicks
    let ratio = trimmed.r1 as f64 / full.r1 as f64;
    assert!((ratio - 30.0 / 55.0).abs() < 0.05, "{ratio}");
    assert!(tabulate(&out.stream, &layout, Some(80.0)).is_err());
}

fn records() -> impl Strategy<Value = (u64, Vec<TagRecord>)> {
    (1u64..1000).prop_flat_map(|trials| {
        let rec = (0..trials, 0u8..2, any::<bool>(), any::<u64>()).prop_map(|(t, d, read, time)| TagRecord {
            trial_index: t,
            detector: d,
            pulse: if read { PulseLabel::Read } else { PulseLabel::Write },
            time_ps: time,
        });
        (Just(trials), prop::collection::vec(rec, 0..200))
    })
}

proptest! {
    #[test]
    fn tagstreams_round_trip_bit_exactly((trials, mut recs) in records(), hash in any::<u64>()) {
        recs.sort();
        let s = TagStream {
            header: StreamHeader { version: FORMAT_VERSION, config_hash: hash, trial_count: trials },
            records: recs,
        };
        let bytes = encode(&s);
        let back = decode(&bytes).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn corrupted_bytes_never_decode_silently_wrong(cut in 1usize..60, flip in 0usize..80) {
        let s = TagStream {
            header: StreamHeader { version: FORMAT_VERSION, config_hash: 9, trial_count: 4 },
            records: vec![
                TagRecord { trial_index: 0, detector: 0, pulse: PulseLabel::Write, time_ps: 5 },
                TagRecord { trial_index: 3, detector: 1, pulse: PulseLabel::Read, time_ps: 7 },
            ],
        };
        let bytes = encode(&s);
        prop_assert!(decode(&bytes[..bytes.len() - cut.min(bytes.len())]).is_err());
        let mut bad = bytes.clone();
        bad[flip] ^= 0x80;
        // a flip in a value field decodes to a different stream; anywhere else it is rejected
        if let Ok(d) = decode(&bad) {
            prop_assert_ne!(d, s);
        }
    }

    #[test]
    fn bound_never_exceeds_the_product_of_ml_values(
        t1 in 200u64..2_000_000, t2 in 200u64..2_000_000,
        f1 in 0.01..0.5f64, f2 in 0.01..0.5f64, f3 in 0.01..0.5f64, f4 in 0.01..0.5f64,
        g1 in 0.0..4.0f64, g2 in 0.0..4.0f64,
    ) {
        let side = |t: u64, fa: f64, fb: f64, g: f64| {
            let (a, b) = ((fa * t as f64) as u64 + 1, (fb * t as f64) as u64 + 1);
            let c = ((g * a as f64 * b as f64 / t as f64).round() as u64).min(a.min(b));
            AutocorrelationInput::Counts { coincidences: c, singles: [a, b], trials: t }
        };
        let (w, r) = (side(t1, f1, f2, g1), side(t2, f3, f4, g2));
        let naive = naive_bound(&w, &r).unwrap();
        match classical_bound(&w, &r) {
            Ok(b) => prop_assert!(b.value <= naive * (1.0 + 1e-9), "{} > {}", b.value, naive),
            Err(_) => prop_assert_eq!(naive, 0.0),
        }
    }
}

#[test]
fn binomial_interval_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (p, t) in [(0.02, 500u64), (0.3, 40), (0.001, 5000), (0.1, 1000)] {
        let draws = 2000;
        let inside = (0..draws)
            .filter(|_| {
                let n = (0..t).filter(|_| rng.random::<f64>() < p).count() as u64;
                let ci = binomial_ci(n, t).unwrap();
                ci.lower() <= p && p <= ci.upper()
            })
            .count();
        let coverage = inside as f64 / draws as f64;
        assert!((0.63..=0.73).contains(&coverage), "p {p} T {t}: {coverage}");
    }
}

#[test]
fn estimators_converge_to_table_values() {
    let base = high_rate(&[100.0], 100_000, 0);
    let t = build_outcome_table(&base, 100.0).unwrap();
    let truth = [
        t.g2_cross().unwrap(),
        t.g2_write_auto().unwrap(),
        t.g2_read_auto().unwrap(),
    ];
    let mut outliers = 0;
    let (mut sums, mut widths) = ([0.0; 3], [0.0; 3]);
    for seed in 0..20 {
        let mut cfg = base.clone();
        cfg.seed = seed;
        let table = sampled_table(&cfg, std::slice::from_ref(&t));
        let est = [
            g2_cross_estimate(&table, 0, 0).unwrap(),
            g2_auto_estimate(&table, PulseLabel::Write, 0).unwrap(),
            g2_auto_estimate(&table, PulseLabel::Read, 0).unwrap(),
        ];
        for (k, (e, &g)) in est.iter().zip(&truth).enumerate() {
            outliers += (pull(e, g) > 4.0) as usize;
            sums[k] += e.value;
            widths[k] += 0.5 * (e.sigma_minus + e.sigma_plus);
        }
    }
    for k in 0..3 {
        // the seed average is 20 draws of the estimator: no bias beyond 4 standard errors
        let (mean, se) = (sums[k] / 20.0, widths[k] / 20.0 / 20f64.sqrt());
        assert!((mean - truth[k]).abs() < 4.0 * se, "estimator {k}: {mean} vs {}", truth[k]);
    }
    // 60 checks; at most 1 % may stray beyond 4σ
    assert!(outliers as f64 <= 0.01 * 60.0, "{outliers} outliers");
}

#[test]
fn thinning_leaves_correlations_unchanged() {
    let cfg = high_rate(&[100.0], 100_000, 11);
    let table = sampled_table(&cfg, &tables(&cfg));
    let estimates = |t: &TrialTable| {
        [
            g2_cross_estimate(t, 0, 0).unwrap(),
            g2_auto_estimate(t, PulseLabel::Write, 0).unwrap(),
            g2_auto_estimate(t, PulseLabel::Read, 0).unwrap(),
        ]
    };
    let full = estimates(&table);
    let resamples = 24;
    let mut sums = [0.0; 3];
    let mut widths = [0.0; 3];
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..resamples {
        let thin = estimates(&table.thinned(|_, _| rng.random::<bool>()));
        for k in 0..3 {
            sums[k] += thin[k].value;
            widths[k] += 0.5 * (thin[k].sigma_minus + thin[k].sigma_plus);
        }
    }
    for k in 0..3 {
        let mean = sums[k] / resamples as f64;
        let combined = 0.5 * (full[k].sigma_minus + full[k].sigma_plus) + widths[k] / resamples as f64;
        assert!((mean - full[k].value).abs() <= combined, "estimator {k}: {mean} vs {}", full[k].value);
    }
}

#[test]
fn distinct_trials_show_no_correlation() {
    let cfg = high_rate(&[100.0], 200_000, 21);
    let table = sampled_table(&cfg, &tables(&cfg));
    for dn in 1..=10 {
        for signed in [dn, -dn] {
            let e = g2_cross_estimate(&table, 0, signed).unwrap();
            // 68 % intervals: all 20 covering 1 at once is unlikely, 3σ is not
            assert!(pull(&e, 1.0) < 3.0, "Δn {signed}: {e:?}");
        }
    }
    let report = analyze(&table, &AnalysisOptions { read_window_ns: None, delta_n: Some(10) });
    let pooled = report.offset_pooled.unwrap();
    assert!(pull(&pooled, 1.0) < 3.0, "{pooled:?}");
    assert!((pooled.value - 1.0).abs() < 0.05, "{pooled:?}");
}

#[test]
fn thermometry_recovers_occupation() {
    for n in [0.01, 0.025, 0.1, 0.5] {
        let mut cfg = ExperimentConfig::default();
        cfg.heating.n_base = n;
        let run = simulate_thermometry(&cfg, 1_000_000, cfg.seed).unwrap();
        let rc = |counts| RateCount { counts, pulses: run.pulses };
        let o = sideband_occupancy_from_counts(
            rc(run.red_counts),
            rc(run.blue_counts),
            Some(rc(run.leak_red_counts)),
            Some(rc(run.leak_blue_counts)),
        )
        .unwrap();
        // expected rates reproduce n exactly; the sampled estimate within 2 half-widths
        let e = &run.expected;
        let from_rates = (e.red - e.leak) / (e.blue - e.red);
        assert!((from_rates - n).abs() / n < 0.02, "n {n}: {from_rates}");
        let w = if o.value < n { o.sigma_plus } else { o.sigma_minus };
        assert!((o.value - n).abs() <= 2.0 * w, "n {n}: {o:?}");
    }
}

#[test]
fn heralded_autocorrelation_matches_full_model() {
    let n_max = 16;
    let seed = TwoModeFockState::product(
        &thermal_state(0.025, n_max).unwrap(),
        &thermal_state(0.0, n_max).unwrap(),
    )
    .unwrap();
    let s = seed.two_mode_squeeze(0.03f64.sqrt().asinh(), 0.0).unwrap();
    let g_om = s.g2_cross().unwrap();
    let eta = 0.027_f64;
    let effect: Vec<f64> = (0..=n_max).map(|n| 1.0 - (1.0 - eta).powi(n as i32)).collect();
    let (_, mech) = s.condition(Mode::B, &effect);
    let direct = mech.g2().unwrap();
    let approx = heralded_autocorr(g_om).unwrap().value;
    assert!((approx - direct).abs() / direct < 0.1, "{approx} vs {direct} (g_om {g_om})");
}
