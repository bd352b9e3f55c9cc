//! Truncated Fock-basis density operators for one and two bosonic modes.
//!
//! Two-mode states live in the tensor basis `|n_A⟩⊗|n_B⟩` with mode A listed
//! first, i.e. flat index `n_A * (n_max + 1) + n_B`. All operations return new
//! states and re-check the trace and truncation invariants.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::QuantumError;

/// Per-mode cutoff used by the protocol simulation unless a larger one is needed.
pub const DEFAULT_N_MAX: usize = 8;
/// Largest tolerated population in the top Fock level of either mode.
pub const LEAK_TOL: f64 = 1e-8;
/// Allowed deviation of the trace from one.
pub const TRACE_TOL: f64 = 1e-9;
/// Mean occupations below this are treated as vacuum when normalizing g⁽²⁾.
pub const N_FLOOR: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-12;
const EIGEN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    A,
    B,
}

impl Mode {
    pub fn label(self) -> char {
        match self {
            Mode::A => 'A',
            Mode::B => 'B',
        }
    }

    pub fn other(self) -> Mode {
        match self {
            Mode::A => Mode::B,
            Mode::B => Mode::A,
        }
    }
}

/// Smallest cutoff (at least [`DEFAULT_N_MAX`]) for which a geometric
/// distribution with the given mean puts less than `tol` into the top level.
pub fn required_truncation(mean: f64, tol: f64) -> usize {
    let mean = mean.max(0.0);
    if mean == 0.0 {
        return DEFAULT_N_MAX;
    }
    let x = mean / (1.0 + mean);
    let mut n = DEFAULT_N_MAX;
    // top-level weight of the geometric law: x^n / (1 + mean)
    while x.powi(n as i32) / (1.0 + mean) > tol && n < 400 {
        n += 1;
    }
    n
}

fn check_prob(name: &'static str, value: f64) -> Result<(), QuantumError> {
    if !(0.0..=1.0).contains(&value) || value.is_nan() {
        return Err(QuantumError::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(())
}

fn check_nonneg(name: &'static str, value: f64) -> Result<(), QuantumError> {
    if !(value >= 0.0) || !value.is_finite() {
        return Err(QuantumError::InvalidParameter {
            name,
            value,
            reason: "must be finite and non-negative",
        });
    }
    Ok(())
}

/// `amp[n][k]` is the amplitude for losing `k` of `n` quanta through a loss
/// channel of transmissivity `eta`.
fn loss_amplitudes(dim: usize, eta: f64) -> Vec<Vec<f64>> {
    let mut amp = vec![vec![0.0; dim]; dim];
    for n in 0..dim {
        let mut binom = 1.0f64;
        for k in 0..=n {
            if k > 0 {
                binom *= (n - k + 1) as f64 / k as f64;
            }
            let w = binom * eta.powi((n - k) as i32) * (1.0 - eta).powi(k as i32);
            amp[n][k] = w.sqrt();
        }
    }
    amp
}

fn hermitize(rho: &mut DMatrix<C64>) {
    let adj = rho.adjoint();
    *rho += adj;
    *rho *= C64::new(0.5, 0.0);
}

/// Smallest eigenvalue ≥ −tol, tested by factorizing ρ + tol·I.
fn is_positive_within(rho: &DMatrix<C64>, tol: f64) -> bool {
    let n = rho.nrows();
    (rho + DMatrix::<C64>::identity(n, n) * C64::new(tol, 0.0))
        .cholesky()
        .is_some()
}

fn max_antihermitian(rho: &DMatrix<C64>) -> f64 {
    let n = rho.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((rho[(i, j)] - rho[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Single-mode density operator on levels `0..=n_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleModeState {
    rho: DMatrix<C64>,
}

/// Thermal (geometric) state with mean occupation `n_bar`, renormalized over
/// the truncated space.
pub fn thermal_state(n_bar: f64, n_max: usize) -> Result<SingleModeState, QuantumError> {
    check_nonneg("n_bar", n_bar)?;
    let dim = n_max + 1;
    let x = n_bar / (1.0 + n_bar);
    let top = x.powi(n_max as i32) / (1.0 + n_bar);
    if top > LEAK_TOL {
        return Err(QuantumError::TruncationUnsafe {
            mode: 'A',
            population: top,
            limit: LEAK_TOL,
            n_max,
        });
    }
    let mut pops: Vec<f64> = (0..dim)
        .map(|n| x.powi(n as i32) / (1.0 + n_bar))
        .collect();
    let total: f64 = pops.iter().sum();
    pops.iter_mut().for_each(|p| *p /= total);
    Ok(SingleModeState::from_populations(&pops))
}

/// Projector onto `|n⟩`.
pub fn fock_state(n: usize, n_max: usize) -> Result<SingleModeState, QuantumError> {
    if n > n_max {
        return Err(QuantumError::LevelOutOfRange { n, n_max });
    }
    let mut pops = vec![0.0; n_max + 1];
    pops[n] = 1.0;
    Ok(SingleModeState::from_populations(&pops))
}

impl SingleModeState {
    pub fn vacuum(n_max: usize) -> Self {
        let mut pops = vec![0.0; n_max + 1];
        pops[0] = 1.0;
        Self::from_populations(&pops)
    }

    /// Diagonal state with the given level populations.
    pub fn from_populations(pops: &[f64]) -> Self {
        let dim = pops.len();
        let mut rho = DMatrix::zeros(dim, dim);
        for (n, &p) in pops.iter().enumerate() {
            rho[(n, n)] = C64::new(p, 0.0);
        }
        Self { rho }
    }

    pub fn n_max(&self) -> usize {
        self.rho.nrows() - 1
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn rho(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.rho[(n, n)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.populations().iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.populations()
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// ⟨n(n−1)⟩
    pub fn second_factorial_moment(&self) -> f64 {
        self.populations()
            .iter()
            .enumerate()
            .map(|(n, p)| (n * n.saturating_sub(1)) as f64 * p)
            .sum()
    }

    /// ⟨n(n−1)⟩ / ⟨n⟩².
    pub fn g2(&self) -> Result<f64, QuantumError> {
        let mean = self.mean();
        if mean < N_FLOOR {
            return Err(QuantumError::UndefinedCorrelation { mode: 'A', mean });
        }
        Ok(self.second_factorial_moment() / (mean * mean))
    }

    pub fn top_population(&self) -> f64 {
        let n = self.n_max();
        self.rho[(n, n)].re
    }

    pub fn check_truncation(&self) -> Result<(), QuantumError> {
        let top = self.top_population();
        if top > LEAK_TOL {
            return Err(QuantumError::TruncationUnsafe {
                mode: 'A',
                population: top,
                limit: LEAK_TOL,
                n_max: self.n_max(),
            });
        }
        Ok(())
    }

    /// Same state on a larger cutoff (zero-padded).
    pub fn embed(&self, n_max: usize) -> Result<Self, QuantumError> {
        if n_max < self.n_max() {
            return Err(QuantumError::TruncationMismatch {
                left: self.n_max(),
                right: n_max,
            });
        }
        let mut rho = DMatrix::zeros(n_max + 1, n_max + 1);
        rho.view_mut((0, 0), (self.dim(), self.dim()))
            .copy_from(&self.rho);
        Ok(Self { rho })
    }

    /// Pure-loss channel with transmissivity `eta`.
    pub fn attenuate(&self, eta: f64) -> Result<Self, QuantumError> {
        check_prob("eta", eta)?;
        if eta == 1.0 {
            return Ok(self.clone());
        }
        let dim = self.dim();
        let amp = loss_amplitudes(dim, eta);
        let mut out = DMatrix::zeros(dim, dim);
        for m in 0..dim {
            for m2 in 0..dim {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..dim - m.max(m2) {
                    acc += self.rho[(m + k, m2 + k)] * (amp[m + k][k] * amp[m2 + k][k]);
                }
                out[(m, m2)] = acc;
            }
        }
        hermitize(&mut out);
        Ok(Self { rho: out })
    }

    /// Phase-insensitive additive noise: adds `n_add` quanta of thermal noise
    /// while leaving the signal amplitude untouched. Built as a loss channel of
    /// transmissivity 1/(1+n_add) followed by a quantum-limited amplifier of
    /// gain 1+n_add.
    pub fn additive_noise(&self, n_add: f64) -> Result<Self, QuantumError> {
        check_nonneg("n_add", n_add)?;
        if n_add == 0.0 {
            return Ok(self.clone());
        }
        let gain = 1.0 + n_add;
        self.attenuate(1.0 / gain)?.amplify(gain)
    }

    /// Quantum-limited phase-insensitive amplifier with Kraus operators
    /// A_k = √(x^k / k!) a†^k G^{−(n+1)/2}, x = (G−1)/G. Equivalent to a
    /// two-mode squeeze with a vacuum ancilla that is then discarded.
    pub fn amplify(&self, gain: f64) -> Result<Self, QuantumError> {
        if !(gain >= 1.0) || !gain.is_finite() {
            return Err(QuantumError::InvalidParameter {
                name: "gain",
                value: gain,
                reason: "must be finite and at least 1",
            });
        }
        if gain == 1.0 {
            return Ok(self.clone());
        }
        let dim = self.dim();
        let x = (gain - 1.0) / gain;
        // amp[m][k] = √(C(m+k, k) x^k G^{−(m+1)})
        let mut amp = vec![vec![0.0; dim]; dim];
        for (m, row) in amp.iter_mut().enumerate() {
            let mut w = gain.powi(-(m as i32 + 1));
            for (k, a) in row.iter_mut().enumerate().take(dim - m) {
                if k > 0 {
                    w *= (m + k) as f64 / k as f64 * x;
                }
                *a = w.sqrt();
            }
        }
        let mut out = DMatrix::<C64>::zeros(dim, dim);
        for m in 0..dim {
            for m2 in 0..dim {
                let v = self.rho[(m, m2)];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..dim - m.max(m2) {
                    out[(m + k, m2 + k)] += v * (amp[m][k] * amp[m2][k]);
                }
            }
        }
        hermitize(&mut out);
        let kept: f64 = (0..dim).map(|n| out[(n, n)].re).sum();
        let lost = self.trace() - kept;
        let state = Self { rho: out };
        state.check_truncation()?;
        if lost > LEAK_TOL {
            return Err(QuantumError::TruncationUnsafe {
                mode: 'A',
                population: lost,
                limit: LEAK_TOL,
                n_max: self.n_max(),
            });
        }
        Ok(Self {
            rho: state.rho / C64::new(kept / self.trace(), 0.0),
        })
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(format!("trace {tr}"));
        }
        let herm = max_antihermitian(&self.rho);
        if herm > HERMITIAN_TOL {
            return Err(format!("non-Hermitian by {herm:e}"));
        }
        if !is_positive_within(&self.rho, EIGEN_TOL) {
            return Err(format!("eigenvalue below -{EIGEN_TOL:e}"));
        }
        self.check_truncation().map_err(|e| e.to_string())
    }
}

#[derive(Clone, Copy, Debug)]
enum Interaction {
    /// exp[r(e^{iφ} a†b† − e^{−iφ} ab)], conserves n_A − n_B
    Squeeze,
    /// exp[θ(e^{iφ} a†b − e^{−iφ} ab†)], conserves n_A + n_B
    Exchange,
}

/// A unitary that is block diagonal over the conserved-number sectors of its
/// generator. Each block is the dense exponential of the truncated generator
/// restricted to that sector.
struct SectorUnitary {
    blocks: Vec<(Vec<usize>, DMatrix<C64>)>,
}

impl SectorUnitary {
    fn build(n_max: usize, kind: Interaction, strength: f64, phi: f64) -> Self {
        let dim = n_max + 1;
        let phase = C64::from_polar(1.0, phi);
        let mut blocks = Vec::new();
        let sectors: Vec<Vec<(usize, usize)>> = match kind {
            Interaction::Squeeze => (-(n_max as i64)..=n_max as i64)
                .map(|k| {
                    (0..dim)
                        .filter_map(|a| {
                            let b = a as i64 - k;
                            (0..dim as i64).contains(&b).then_some((a, b as usize))
                        })
                        .collect()
                })
                .collect(),
            Interaction::Exchange => (0..=2 * n_max)
                .map(|s| {
                    (0..dim)
                        .filter_map(|a| (s >= a && s - a < dim).then(|| (a, s - a)))
                        .collect()
                })
                .collect(),
        };
        for members in sectors {
            let m = members.len();
            let mut gen = DMatrix::<C64>::zeros(m, m);
            for j in 0..m.saturating_sub(1) {
                let (a, b) = members[j];
                let amp = match kind {
                    Interaction::Squeeze => (((a + 1) * (b + 1)) as f64).sqrt(),
                    Interaction::Exchange => (((a + 1) * b) as f64).sqrt(),
                };
                gen[(j + 1, j)] = phase * (strength * amp);
                gen[(j, j + 1)] = -phase.conj() * (strength * amp);
            }
            let unitary = if m == 1 {
                DMatrix::identity(1, 1)
            } else {
                gen.exp()
            };
            let idx = members.iter().map(|&(a, b)| a * dim + b).collect();
            blocks.push((idx, unitary));
        }
        Self { blocks }
    }

    /// U ρ U†
    fn conjugate(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut x = rho.clone();
        for (idx, u) in &self.blocks {
            let rows = rho.select_rows(idx.iter());
            let new_rows = u * rows;
            for (local, &global) in idx.iter().enumerate() {
                x.row_mut(global).copy_from(&new_rows.row(local));
            }
        }
        let mut y = x.clone();
        for (idx, u) in &self.blocks {
            let cols = x.select_columns(idx.iter());
            let new_cols = cols * u.adjoint();
            for (local, &global) in idx.iter().enumerate() {
                y.column_mut(global).copy_from(&new_cols.column(local));
            }
        }
        y
    }
}

/// Density operator of a mode pair on the truncated product space.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeFockState {
    n_max: usize,
    rho: DMatrix<C64>,
}

impl TwoModeFockState {
    pub fn vacuum(n_max: usize) -> Self {
        Self::tensor_with_vacuum(&SingleModeState::vacuum(n_max))
    }

    /// ρ_A ⊗ ρ_B; both factors must share the cutoff.
    pub fn product(a: &SingleModeState, b: &SingleModeState) -> Result<Self, QuantumError> {
        if a.n_max() != b.n_max() {
            return Err(QuantumError::TruncationMismatch {
                left: a.n_max(),
                right: b.n_max(),
            });
        }
        Ok(Self {
            n_max: a.n_max(),
            rho: a.rho.kronecker(&b.rho),
        })
    }

    /// ρ_A ⊗ |0⟩⟨0|
    pub fn tensor_with_vacuum(a: &SingleModeState) -> Self {
        let vac = SingleModeState::vacuum(a.n_max());
        Self {
            n_max: a.n_max(),
            rho: a.rho.kronecker(&vac.rho),
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn rho(&self) -> &DMatrix<C64> {
        &self.rho
    }

    fn index(&self, a: usize, b: usize) -> usize {
        a * self.dim() + b
    }

    pub fn trace(&self) -> f64 {
        (0..self.rho.nrows()).map(|i| self.rho[(i, i)].re).sum()
    }

    /// Joint number distribution P(n_A, n_B), rows indexed by n_A.
    pub fn joint_populations(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |a, b| self.rho[(self.index(a, b), self.index(a, b))].re)
    }

    pub fn marginal_populations(&self, mode: Mode) -> Vec<f64> {
        let joint = self.joint_populations();
        match mode {
            Mode::A => joint.row_iter().map(|r| r.sum()).collect(),
            Mode::B => joint.column_iter().map(|c| c.sum()).collect(),
        }
    }

    pub fn top_population(&self, mode: Mode) -> f64 {
        self.marginal_populations(mode)[self.n_max]
    }

    pub fn check_truncation(&self) -> Result<(), QuantumError> {
        for mode in [Mode::A, Mode::B] {
            let top = self.top_population(mode);
            if top > LEAK_TOL {
                return Err(QuantumError::TruncationUnsafe {
                    mode: mode.label(),
                    population: top,
                    limit: LEAK_TOL,
                    n_max: self.n_max,
                });
            }
        }
        Ok(())
    }

    fn finish(mut rho: DMatrix<C64>, n_max: usize) -> Result<Self, QuantumError> {
        hermitize(&mut rho);
        let out = Self { n_max, rho };
        out.check_truncation()?;
        Ok(out)
    }

    /// Two-mode squeezing U = exp[r(e^{iφ}a†b† − e^{−iφ}ab)].
    pub fn two_mode_squeeze(&self, r: f64, phi: f64) -> Result<Self, QuantumError> {
        check_nonneg("r", r)?;
        if r == 0.0 {
            return Ok(self.clone());
        }
        let u = SectorUnitary::build(self.n_max, Interaction::Squeeze, r, phi);
        Self::finish(u.conjugate(&self.rho), self.n_max)
    }

    /// Beam splitter with Heisenberg action a → √(1−ε)a + e^{iφ}√ε b.
    /// `eps = 1` swaps the two modes.
    pub fn beam_splitter(&self, eps: f64, phi: f64) -> Result<Self, QuantumError> {
        check_prob("eps", eps)?;
        if eps == 0.0 {
            return Ok(self.clone());
        }
        let theta = eps.sqrt().asin();
        let u = SectorUnitary::build(self.n_max, Interaction::Exchange, theta, phi);
        Self::finish(u.conjugate(&self.rho), self.n_max)
    }

    /// Pure-loss channel with transmissivity `eta` on one mode.
    pub fn attenuate(&self, mode: Mode, eta: f64) -> Result<Self, QuantumError> {
        check_prob("eta", eta)?;
        if eta == 1.0 {
            return Ok(self.clone());
        }
        let d = self.dim();
        let amp = loss_amplitudes(d, eta);
        let mut out = DMatrix::<C64>::zeros(d * d, d * d);
        for m in 0..d {
            for m2 in 0..d {
                let kmax = d - m.max(m2);
                for o in 0..d {
                    for o2 in 0..d {
                        let mut acc = C64::new(0.0, 0.0);
                        for k in 0..kmax {
                            let w = amp[m + k][k] * amp[m2 + k][k];
                            let (i, j) = match mode {
                                Mode::A => (self.index(m + k, o), self.index(m2 + k, o2)),
                                Mode::B => (self.index(o, m + k), self.index(o2, m2 + k)),
                            };
                            acc += self.rho[(i, j)] * w;
                        }
                        let (i, j) = match mode {
                            Mode::A => (self.index(m, o), self.index(m2, o2)),
                            Mode::B => (self.index(o, m), self.index(o2, m2)),
                        };
                        out[(i, j)] = acc;
                    }
                }
            }
        }
        Self::finish(out, self.n_max)
    }

    /// Reduced state of `keep`.
    pub fn partial_trace(&self, keep: Mode) -> SingleModeState {
        let d = self.dim();
        let rho = DMatrix::from_fn(d, d, |i, j| {
            (0..d)
                .map(|t| match keep {
                    Mode::A => self.rho[(self.index(i, t), self.index(j, t))],
                    Mode::B => self.rho[(self.index(t, i), self.index(t, j))],
                })
                .sum()
        });
        SingleModeState { rho }
    }

    /// Applies a number-diagonal measurement element `effect[n]` to `measured`
    /// and returns (outcome probability, normalized post-measurement state of
    /// the other mode). The state is the vacuum when the probability vanishes.
    pub fn condition(&self, measured: Mode, effect: &[f64]) -> (f64, SingleModeState) {
        let d = self.dim();
        let keep = measured.other();
        let rho: DMatrix<C64> = DMatrix::from_fn(d, d, |i, j| {
            (0..d)
                .map(|t| {
                    let e = effect.get(t).copied().unwrap_or(0.0);
                    match keep {
                        Mode::A => self.rho[(self.index(i, t), self.index(j, t))] * e,
                        Mode::B => self.rho[(self.index(t, i), self.index(t, j))] * e,
                    }
                })
                .sum::<C64>()
        });
        let prob: f64 = (0..d).map(|n| rho[(n, n)].re).sum();
        if prob <= 0.0 {
            return (0.0, SingleModeState::vacuum(self.n_max));
        }
        let mut state = SingleModeState {
            rho: rho / C64::new(prob, 0.0),
        };
        hermitize(&mut state.rho);
        (prob, state)
    }

    pub fn mean(&self, mode: Mode) -> f64 {
        self.marginal_populations(mode)
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// ⟨n(n−1)⟩/⟨n⟩² of one mode.
    pub fn g2_auto(&self, mode: Mode) -> Result<f64, QuantumError> {
        let pops = self.marginal_populations(mode);
        let mean: f64 = pops.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        if mean < N_FLOOR {
            return Err(QuantumError::UndefinedCorrelation {
                mode: mode.label(),
                mean,
            });
        }
        let fact: f64 = pops
            .iter()
            .enumerate()
            .map(|(n, p)| (n * n.saturating_sub(1)) as f64 * p)
            .sum();
        Ok(fact / (mean * mean))
    }

    /// ⟨n_A n_B⟩/(⟨n_A⟩⟨n_B⟩).
    pub fn g2_cross(&self) -> Result<f64, QuantumError> {
        let joint = self.joint_populations();
        let mut mean_a = 0.0;
        let mut mean_b = 0.0;
        let mut cross = 0.0;
        for a in 0..self.dim() {
            for b in 0..self.dim() {
                let p = joint[(a, b)];
                mean_a += a as f64 * p;
                mean_b += b as f64 * p;
                cross += (a * b) as f64 * p;
            }
        }
        for (mode, mean) in [(Mode::A, mean_a), (Mode::B, mean_b)] {
            if mean < N_FLOOR {
                return Err(QuantumError::UndefinedCorrelation {
                    mode: mode.label(),
                    mean,
                });
            }
        }
        Ok(cross / (mean_a * mean_b))
    }

    /// Full invariant check (trace, Hermiticity, positivity, truncation).
    pub fn check_invariants(&self) -> Result<(), String> {
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(format!("trace {tr}"));
        }
        let herm = max_antihermitian(&self.rho);
        if herm > HERMITIAN_TOL {
            return Err(format!("non-Hermitian by {herm:e}"));
        }
        if !is_positive_within(&self.rho, EIGEN_TOL) {
            return Err(format!("eigenvalue below -{EIGEN_TOL:e}"));
        }
        self.check_truncation().map_err(|e| e.to_string())
    }
}
