//! Zero-mean Gaussian states in the covariance-matrix picture, used as an
//! independent check on the Fock engine.
//!
//! Quadrature ordering is (x_A, p_A, x_B, p_B) with x = (a + a†)/√2, so the
//! vacuum covariance is ½·I and ⟨n⟩ = (V_xx + V_pp − 1)/2.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64 as C64;

use super::detection::ClickTable;
use super::fock::{thermal_state, Mode, SingleModeState, TwoModeFockState};
use crate::error::QuantumError;

const SYMMETRY_TOL: f64 = 1e-12;
const UNCERTAINTY_TOL: f64 = 1e-10;

/// A step of a two-mode circuit understood by both state engines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CircuitOp {
    /// Replace `mode` by a thermal state.
    Thermal { mode: Mode, n_bar: f64 },
    /// Replace `mode` by a Fock state (Gaussian only for `n = 0`).
    Fock { mode: Mode, n: usize },
    TwoModeSqueeze { r: f64, phi: f64 },
    BeamSplitter { eps: f64, phi: f64 },
    Attenuate { mode: Mode, eta: f64 },
    AdditiveNoise { mode: Mode, n_add: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceState {
    cov: Matrix4<f64>,
}

fn offset(mode: Mode) -> usize {
    match mode {
        Mode::A => 0,
        Mode::B => 2,
    }
}

impl CovarianceState {
    pub fn vacuum() -> Self {
        Self {
            cov: Matrix4::identity() * 0.5,
        }
    }

    pub fn cov(&self) -> &Matrix4<f64> {
        &self.cov
    }

    /// Runs `ops` starting from the two-mode vacuum.
    pub fn from_circuit(ops: &[CircuitOp]) -> Result<Self, QuantumError> {
        ops.iter().try_fold(Self::vacuum(), |s, op| s.apply(op))
    }

    fn symplectic(&self, s: &Matrix4<f64>) -> Self {
        Self {
            cov: s * self.cov * s.transpose(),
        }
    }

    fn reset_mode(&self, mode: Mode, n_bar: f64) -> Self {
        let mut cov = self.cov;
        let o = offset(mode);
        for i in 0..4 {
            cov[(o, i)] = 0.0;
            cov[(o + 1, i)] = 0.0;
            cov[(i, o)] = 0.0;
            cov[(i, o + 1)] = 0.0;
        }
        cov[(o, o)] = n_bar + 0.5;
        cov[(o + 1, o + 1)] = n_bar + 0.5;
        Self { cov }
    }

    pub fn apply(&self, op: &CircuitOp) -> Result<Self, QuantumError> {
        Ok(match *op {
            CircuitOp::Thermal { mode, n_bar } => self.reset_mode(mode, n_bar),
            CircuitOp::Fock { mode, n: 0 } => self.reset_mode(mode, 0.0),
            CircuitOp::Fock { .. } => return Err(QuantumError::NonGaussian("Fock preparation")),
            CircuitOp::TwoModeSqueeze { r, phi } => {
                let (c, s) = (r.cosh(), r.sinh());
                let (cp, sp) = (phi.cos(), phi.sin());
                // a → c·a + s·e^{iφ}·b†, b → c·b + s·e^{iφ}·a†
                #[rustfmt::skip]
                let m = Matrix4::new(
                    c,       0.0,     s * cp,  s * sp,
                    0.0,     c,       s * sp, -s * cp,
                    s * cp,  s * sp,  c,       0.0,
                    s * sp, -s * cp,  0.0,     c,
                );
                self.symplectic(&m)
            }
            CircuitOp::BeamSplitter { eps, phi } => {
                let (c, s) = ((1.0 - eps).sqrt(), eps.sqrt());
                let (cp, sp) = (phi.cos(), phi.sin());
                // a → c·a + s·e^{iφ}·b, b → c·b − s·e^{−iφ}·a
                #[rustfmt::skip]
                let m = Matrix4::new(
                    c,        0.0,      s * cp,  -s * sp,
                    0.0,      c,        s * sp,   s * cp,
                   -s * cp,  -s * sp,   c,        0.0,
                    s * sp,  -s * cp,   0.0,      c,
                );
                self.symplectic(&m)
            }
            CircuitOp::Attenuate { mode, eta } => {
                let o = offset(mode);
                let mut cov = self.cov;
                let k = eta.sqrt();
                for i in 0..4 {
                    if i == o || i == o + 1 {
                        continue;
                    }
                    for j in [o, o + 1] {
                        cov[(i, j)] *= k;
                        cov[(j, i)] *= k;
                    }
                }
                for i in [o, o + 1] {
                    for j in [o, o + 1] {
                        cov[(i, j)] *= eta;
                    }
                    cov[(i, i)] += 0.5 * (1.0 - eta);
                }
                Self { cov }
            }
            CircuitOp::AdditiveNoise { mode, n_add } => {
                let o = offset(mode);
                let mut cov = self.cov;
                cov[(o, o)] += n_add;
                cov[(o + 1, o + 1)] += n_add;
                Self { cov }
            }
        })
    }

    fn block(&self, mode: Mode) -> Matrix2<f64> {
        let o = offset(mode);
        self.cov.fixed_view::<2, 2>(o, o).into_owned()
    }

    pub fn mean_occupation(&self, mode: Mode) -> f64 {
        let b = self.block(mode);
        0.5 * (b[(0, 0)] + b[(1, 1)] - 1.0)
    }

    /// Probability that a single mode is found in vacuum: 1/√det(V + ½I).
    pub fn vacuum_probability(&self, mode: Mode) -> f64 {
        let m = self.block(mode) + Matrix2::identity() * 0.5;
        1.0 / m.determinant().sqrt()
    }

    /// Probability that both modes are in vacuum.
    pub fn joint_vacuum_probability(&self) -> f64 {
        let m = self.cov + Matrix4::identity() * 0.5;
        1.0 / m.determinant().sqrt()
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        let asym = (self.cov - self.cov.transpose()).abs().max();
        if asym > SYMMETRY_TOL {
            return Err(format!("covariance asymmetric by {asym:e}"));
        }
        // V + (i/2)Ω ≥ 0
        let mut h = self.cov.map(|x| C64::new(x, 0.0));
        for o in [0, 2] {
            h[(o, o + 1)] += C64::new(0.0, 0.5);
            h[(o + 1, o)] -= C64::new(0.0, 0.5);
        }
        let min = h
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min < -UNCERTAINTY_TOL {
            return Err(format!("uncertainty relation violated: eigenvalue {min:e}"));
        }
        Ok(())
    }
}

/// Vacuum probabilities and occupations after per-mode loss `eta`; with ideal
/// threshold detectors these fix the click table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianClickStats {
    pub vacuum_a: f64,
    pub vacuum_b: f64,
    pub vacuum_ab: f64,
    pub mean_a: f64,
    pub mean_b: f64,
}

impl GaussianClickStats {
    pub fn click_table(&self) -> ClickTable {
        ClickTable {
            p00: self.vacuum_ab,
            p01: self.vacuum_a - self.vacuum_ab,
            p10: self.vacuum_b - self.vacuum_ab,
            p11: 1.0 - self.vacuum_a - self.vacuum_b + self.vacuum_ab,
        }
    }
}

pub fn gaussian_click_stats(state: &CovarianceState, eta: [f64; 2]) -> GaussianClickStats {
    let lossy = state
        .apply(&CircuitOp::Attenuate {
            mode: Mode::A,
            eta: eta[0],
        })
        .and_then(|s| {
            s.apply(&CircuitOp::Attenuate {
                mode: Mode::B,
                eta: eta[1],
            })
        })
        .expect("loss is Gaussian");
    GaussianClickStats {
        vacuum_a: lossy.vacuum_probability(Mode::A),
        vacuum_b: lossy.vacuum_probability(Mode::B),
        vacuum_ab: lossy.joint_vacuum_probability(),
        mean_a: lossy.mean_occupation(Mode::A),
        mean_b: lossy.mean_occupation(Mode::B),
    }
}

impl TwoModeFockState {
    /// Runs `ops` on the truncated two-mode vacuum.
    pub fn from_circuit(n_max: usize, ops: &[CircuitOp]) -> Result<Self, QuantumError> {
        let mut state = TwoModeFockState::vacuum(n_max);
        for op in ops {
            state = match *op {
                CircuitOp::Thermal { mode, n_bar } => {
                    replace_mode(&state, mode, &thermal_state(n_bar, n_max)?)?
                }
                CircuitOp::Fock { mode, n } => {
                    replace_mode(&state, mode, &super::fock::fock_state(n, n_max)?)?
                }
                CircuitOp::TwoModeSqueeze { r, phi } => state.two_mode_squeeze(r, phi)?,
                CircuitOp::BeamSplitter { eps, phi } => state.beam_splitter(eps, phi)?,
                CircuitOp::Attenuate { mode, eta } => state.attenuate(mode, eta)?,
                CircuitOp::AdditiveNoise { mode, n_add } => {
                    if n_add == 0.0 {
                        state
                    } else {
                        // only supported on product states with the other mode
                        // untouched; the circuits used here apply noise before
                        // any entangling step
                        let kept = state.partial_trace(mode.other());
                        let noisy = state.partial_trace(mode).additive_noise(n_add)?;
                        match mode {
                            Mode::A => TwoModeFockState::product(&noisy, &kept)?,
                            Mode::B => TwoModeFockState::product(&kept, &noisy)?,
                        }
                    }
                }
            };
        }
        Ok(state)
    }
}

fn replace_mode(
    state: &TwoModeFockState,
    mode: Mode,
    fresh: &SingleModeState,
) -> Result<TwoModeFockState, QuantumError> {
    let kept = state.partial_trace(mode.other());
    match mode {
        Mode::A => TwoModeFockState::product(fresh, &kept),
        Mode::B => TwoModeFockState::product(&kept, fresh),
    }
}
