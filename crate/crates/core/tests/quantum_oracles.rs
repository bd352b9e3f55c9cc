//! Fock engine against closed forms and against the covariance-matrix engine.

use phononherald::quantum::{
    click_probabilities, fock_state, gaussian_click_stats, required_truncation, thermal_state,
    CircuitOp, CovarianceState, DetectorModel, Mode, SingleModeState, TwoModeFockState,
};

fn tmsv(mu: f64, n_max: usize) -> TwoModeFockState {
    TwoModeFockState::vacuum(n_max)
        .two_mode_squeeze(mu.sqrt().asinh(), 0.0)
        .unwrap()
}

#[test]
fn tmsv_number_distribution_matches_closed_form() {
    for r in [0.05_f64, 0.17, 0.3] {
        let s = TwoModeFockState::vacuum(12).two_mode_squeeze(r, 0.7).unwrap();
        let p = s.joint_populations();
        let lam2 = r.tanh().powi(2);
        for n in 0..=12 {
            for m in 0..=12 {
                if n != m {
                    assert!(p[(n, m)].abs() < 1e-10, "P({n},{m}) = {}", p[(n, m)]);
                }
            }
        }
        for n in 0..=4 {
            let expected = (1.0 - lam2) * lam2.powi(n as i32);
            assert!((p[(n, n)] - expected).abs() < 1e-10, "r {r} n {n}");
            assert!((p[(n, n)] / p[(0, 0)] - lam2.powi(n as i32)).abs() < 1e-8);
        }
    }
    let s = tmsv(0.03, 12);
    let p = s.joint_populations();
    assert!((p[(1, 1)] / p[(0, 0)] - 0.0291).abs() < 1e-4);
}

#[test]
fn tmsv_cross_correlation_is_two_plus_inverse_mean() {
    let mu = 0.03;
    let g = tmsv(mu, 12).g2_cross().unwrap();
    assert!((g - (2.0 + 1.0 / mu)).abs() < 1e-6, "{g}");
}

#[test]
fn thermal_and_fock_autocorrelations() {
    for n_bar in [0.01, 0.025, 0.3, 0.5] {
        let n_max = required_truncation(n_bar, 1e-14).max(12);
        let s = thermal_state(n_bar, n_max).unwrap();
        assert!((s.g2().unwrap() - 2.0).abs() < 1e-8, "n_bar {n_bar}");
        assert!((s.mean() - n_bar).abs() < 1e-8);
    }
    assert_eq!(fock_state(1, 8).unwrap().g2().unwrap(), 0.0);
    assert!(fock_state(9, 8).is_err());
}

#[test]
fn loss_on_thermal_state_is_thermal() {
    let n_max = 40;
    let s = thermal_state(0.5, n_max).unwrap();
    for eta in [0.1, 0.37, 0.9] {
        let lossy = s.attenuate(eta).unwrap().populations();
        let expected = thermal_state(eta * 0.5, n_max).unwrap().populations();
        for (a, b) in lossy.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

fn test_states() -> Vec<TwoModeFockState> {
    let n_max = 24;
    let mixed = SingleModeState::from_populations(&[0.5, 0.3, 0.15, 0.05]).embed(n_max).unwrap();
    vec![
        tmsv(0.03, n_max),
        TwoModeFockState::product(&thermal_state(0.2, n_max).unwrap(), &thermal_state(0.05, n_max).unwrap())
            .unwrap()
            .two_mode_squeeze(0.2, 0.0)
            .unwrap(),
        TwoModeFockState::product(&mixed, &fock_state(2, n_max).unwrap())
            .unwrap()
            .beam_splitter(0.3, 0.0)
            .unwrap(),
    ]
}

#[test]
fn correlations_are_loss_invariant() {
    for s in test_states() {
        let g_a = s.g2_auto(Mode::A).unwrap();
        let g_b = s.g2_auto(Mode::B).unwrap();
        let g_ab = s.g2_cross().unwrap();
        for eta in [0.06, 0.2, 0.5, 0.93, 1.0] {
            for mode in [Mode::A, Mode::B] {
                let l = s.attenuate(mode, eta).unwrap();
                assert!((l.g2_auto(Mode::A).unwrap() - g_a).abs() < 1e-8);
                assert!((l.g2_auto(Mode::B).unwrap() - g_b).abs() < 1e-8);
                assert!((l.g2_cross().unwrap() - g_ab).abs() < 1e-8, "eta {eta}");
            }
        }
    }
}

#[test]
fn hbt_split_reproduces_autocorrelation() {
    let n_max = 24;
    let inputs = [
        thermal_state(0.3, n_max).unwrap(),
        fock_state(2, n_max).unwrap(),
        SingleModeState::from_populations(&[0.4, 0.35, 0.2, 0.05]).embed(n_max).unwrap(),
        tmsv(0.1, n_max).partial_trace(Mode::A),
    ];
    for input in inputs {
        let split = TwoModeFockState::tensor_with_vacuum(&input)
            .beam_splitter(0.5, 0.0)
            .unwrap();
        let g12 = split.g2_cross().unwrap();
        assert!((g12 - input.g2().unwrap()).abs() < 1e-8, "{g12} vs {}", input.g2().unwrap());
    }
}

#[test]
fn single_photon_splits_evenly_without_coincidence() {
    let s = TwoModeFockState::tensor_with_vacuum(&fock_state(1, 8).unwrap())
        .beam_splitter(0.5, 0.0)
        .unwrap();
    let t = click_probabilities(&s, &DetectorModel::ideal(1.0), &DetectorModel::ideal(1.0));
    assert!((t.click_first() - 0.5).abs() < 1e-12);
    assert!((t.click_second() - 0.5).abs() < 1e-12);
    assert!(t.p11.abs() < 1e-12);
}

#[test]
fn thermal_click_probability_is_geometric_thinning() {
    let n_bar = 0.4;
    let s = TwoModeFockState::tensor_with_vacuum(&thermal_state(n_bar, 40).unwrap());
    for eta in [0.016, 0.3, 1.0] {
        let t = click_probabilities(&s, &DetectorModel::ideal(eta), &DetectorModel::ideal(1.0));
        assert!((t.click_first() - (1.0 - 1.0 / (1.0 + eta * n_bar))).abs() < 1e-12);
    }
    let one = TwoModeFockState::tensor_with_vacuum(&fock_state(1, 8).unwrap());
    let t = click_probabilities(&one, &DetectorModel::ideal(0.016), &DetectorModel::ideal(1.0));
    assert!((t.click_first() - 0.016).abs() < 1e-15);
}

/// Gaussian circuit grid shared by both engines.
pub fn oracle_grid() -> Vec<(f64, f64, f64)> {
    let mut g = Vec::new();
    for r in [0.0, 0.05, 0.17, 0.3] {
        for n_bar in [0.0, 0.025, 0.5] {
            for eta in [0.5, 1.0] {
                g.push((r, n_bar, eta));
            }
        }
    }
    g
}

#[test]
fn fock_and_gaussian_engines_agree() {
    for (r, n_bar, eta) in oracle_grid() {
        let ops = [
            CircuitOp::Thermal { mode: Mode::A, n_bar },
            CircuitOp::TwoModeSqueeze { r, phi: 0.0 },
            CircuitOp::BeamSplitter { eps: 0.2, phi: 0.0 },
        ];
        // joint mean bounds both modes' occupations
        let mean = n_bar * r.cosh().powi(2) + r.sinh().powi(2);
        let n_max = required_truncation(mean, 1e-13).max(12);
        let fock = TwoModeFockState::from_circuit(n_max, &ops).unwrap();
        let cov = CovarianceState::from_circuit(&ops).unwrap();
        let gauss = gaussian_click_stats(&cov, [eta, eta]);
        let clicks = click_probabilities(&fock, &DetectorModel::ideal(eta), &DetectorModel::ideal(eta));
        let g = gauss.click_table();
        let tag = format!("r {r} n {n_bar} eta {eta}");
        assert!((fock.mean(Mode::A) * eta - gauss.mean_a).abs() < 1e-8, "{tag}");
        assert!((fock.mean(Mode::B) * eta - gauss.mean_b).abs() < 1e-8, "{tag}");
        for (a, b) in [
            (clicks.p00, g.p00),
            (clicks.p01, g.p01),
            (clicks.p10, g.p10),
            (clicks.p11, g.p11),
        ] {
            assert!((a - b).abs() < 1e-8, "{tag}: {a} vs {b}");
        }
    }
}

#[test]
fn stokes_and_anti_stokes_rates_follow_occupation() {
    for n in [0.025, 0.1, 0.5] {
        for s in [0.01, 0.05] {
            let n_max = required_truncation(n + s, 1e-12);
            let start = TwoModeFockState::tensor_with_vacuum(&thermal_state(n, n_max).unwrap());
            let blue = start.two_mode_squeeze(f64::sqrt(s).asinh(), 0.0).unwrap().mean(Mode::B);
            let red = start.beam_splitter(s, 0.0).unwrap().mean(Mode::B);
            let ratio = blue / red / ((n + 1.0) / n);
            assert!((ratio - 1.0).abs() < 0.01, "n {n} s {s}: {ratio}");
        }
    }
}

#[test]
fn operations_keep_state_invariants() {
    for s in test_states() {
        s.check_invariants().unwrap();
        s.attenuate(Mode::A, 0.3).unwrap().check_invariants().unwrap();
        s.beam_splitter(0.4, 0.2).unwrap().check_invariants().unwrap();
    }
}

#[test]
fn oversized_occupation_is_truncation_unsafe() {
    assert!(thermal_state(5.0, 8).is_err());
    assert!(TwoModeFockState::vacuum(8).two_mode_squeeze(1.5, 0.0).is_err());
}
