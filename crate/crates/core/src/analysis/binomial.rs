//! Maximum-likelihood binomial rates with 68 % likelihood intervals.
//!
//! Normalized over p ∈ [0, 1], the likelihood pᴺ(1−p)ᵀ⁻ᴺ is the Beta(N+1,
//! T−N+1) density, whose CDF equals the upper tail P[X ≥ N+1] of
//! X ~ Binomial(T+1, p). The tail is summed term by term in log space, which
//! stays exact for the large trial counts of a full run.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::AnalysisError;

/// Likelihood mass excluded on each side of the interval.
pub const TAIL_MASS: f64 = 0.16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BinomialCi {
    pub p_ml: f64,
    pub sigma_minus: f64,
    pub sigma_plus: f64,
}

impl BinomialCi {
    pub fn lower(&self) -> f64 {
        self.p_ml - self.sigma_minus
    }

    pub fn upper(&self) -> f64 {
        self.p_ml + self.sigma_plus
    }
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Sum of Binomial(m, p) pmf terms starting at `from` and walking in
/// direction `step` (±1) until the terms become negligible.
fn tail_sum(m: u64, p: f64, from: u64, up: bool) -> f64 {
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mode = ((m + 1) as f64 * p).floor() as u64;
    let mut acc = 0.0;
    let mut j = from;
    loop {
        let term = (ln_choose(m, j) + j as f64 * lp + (m - j) as f64 * lq).exp();
        acc += term;
        let past_mode = if up { j > mode } else { j < mode };
        if (past_mode && term <= acc * 1e-17) || (up && j == m) || (!up && j == 0) {
            return acc;
        }
        j = if up { j + 1 } else { j - 1 };
    }
}

/// ∫₀ᵖ of the normalized likelihood of `n` events in `t` trials.
pub fn posterior_cdf(n: u64, t: u64, p: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let m = t + 1;
    let k = n + 1;
    // sum whichever tail lies away from the bulk for accuracy
    if (k as f64) > m as f64 * p {
        tail_sum(m, p, k, true).min(1.0)
    } else {
        (1.0 - tail_sum(m, p, k - 1, false)).max(0.0)
    }
}

/// p with posterior_cdf(n, t, p) = q, by bisection.
pub fn posterior_quantile(n: u64, t: u64, q: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if posterior_cdf(n, t, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// ML rate N/T with interval half-widths leaving 16 % of the likelihood
/// mass outside on each side; an exhausted side (N = 0 or N = T) has width 0.
pub fn binomial_ci(n: u64, t: u64) -> Result<BinomialCi, AnalysisError> {
    if t == 0 {
        return Err(AnalysisError::NoTrials);
    }
    if n > t {
        return Err(AnalysisError::CountsExceedTrials { events: n, trials: t });
    }
    let p = n as f64 / t as f64;
    let sigma_minus = if n == 0 {
        0.0
    } else {
        (p - posterior_quantile(n, t, TAIL_MASS)).max(0.0)
    };
    let sigma_plus = if n == t {
        0.0
    } else {
        (posterior_quantile(n, t, 1.0 - TAIL_MASS) - p).max(0.0)
    };
    Ok(BinomialCi {
        p_ml: p,
        sigma_minus,
        sigma_plus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Adaptive Simpson integration of the normalized likelihood, independent
    /// of the binomial-tail identity.
    fn quad_cdf(n: u64, t: u64, p: f64) -> f64 {
        let ln_norm = ln_gamma(t as f64 + 2.0) - ln_gamma(n as f64 + 1.0) - ln_gamma((t - n) as f64 + 1.0);
        let f = |x: f64| {
            if x <= 0.0 || x >= 1.0 {
                return if (x <= 0.0 && n == 0) || (x >= 1.0 && n == t) { ln_norm.exp() } else { 0.0 };
            }
            (ln_norm + n as f64 * x.ln() + (t - n) as f64 * (-x).ln_1p()).exp()
        };
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (a, b) = (0.0, p);
        let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        simpson(&f, a, b, fa, fm, fb, whole, 1e-10, 50)
    }

    #[test]
    fn zero_events_closed_form() {
        let ci = binomial_ci(0, 100).unwrap();
        assert_eq!(ci.p_ml, 0.0);
        assert_eq!(ci.sigma_minus, 0.0);
        let expect = 1.0 - 0.16f64.powf(1.0 / 101.0);
        assert!((ci.sigma_plus - expect).abs() < 1e-6, "{ci:?}");
        assert!((expect - 0.01798).abs() < 1e-5);
    }

    #[test]
    fn all_events_mirror_zero_events() {
        let a = binomial_ci(0, 100).unwrap();
        let b = binomial_ci(100, 100).unwrap();
        assert_eq!(b.p_ml, 1.0);
        assert_eq!(b.sigma_plus, 0.0);
        assert!((b.sigma_minus - a.sigma_plus).abs() < 1e-12);
    }

    #[test]
    fn gaussian_limit() {
        let ci = binomial_ci(100, 10_000).unwrap();
        let s = (0.01f64 * 0.99 / 1e4).sqrt();
        let half = 0.5 * (ci.sigma_minus + ci.sigma_plus);
        assert!((half / s - 1.0).abs() < 0.01, "{ci:?}");
        // the posterior mean sits ~0.1σ above the mode at N = 100, skewing
        // the equal-tail edges by about that much on each side
        assert!(ci.sigma_plus > ci.sigma_minus);
        assert!((ci.sigma_minus / s - 0.90).abs() < 0.01, "{ci:?}");
        assert!((ci.sigma_plus / s - 1.095).abs() < 0.01, "{ci:?}");
        // the skew fades as 1/√N
        let ci = binomial_ci(10_000, 1_000_000).unwrap();
        let s = (0.01f64 * 0.99 / 1e6).sqrt();
        assert!((ci.sigma_minus / s - 1.0).abs() < 0.02 && (ci.sigma_plus / s - 1.0).abs() < 0.02);
    }

    #[test]
    fn tail_identity_matches_quadrature() {
        for &(n, t) in &[(0u64, 20u64), (3, 20), (17, 1000), (100, 10_000), (700, 1_000_000)] {
            let ci = binomial_ci(n, t).unwrap();
            for p in [ci.lower(), ci.p_ml, ci.upper()] {
                if p <= 0.0 {
                    continue;
                }
                let a = posterior_cdf(n, t, p);
                let b = quad_cdf(n, t, p);
                assert!((a - b).abs() < 1e-6, "n={n} t={t} p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn interval_edges_hold_sixteen_percent() {
        let (n, t) = (12, 5_000);
        let ci = binomial_ci(n, t).unwrap();
        assert!((quad_cdf(n, t, ci.lower()) - 0.16).abs() < 1e-6);
        assert!((quad_cdf(n, t, ci.upper()) - 0.84).abs() < 1e-6);
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(binomial_ci(0, 0), Err(AnalysisError::NoTrials));
        assert!(binomial_ci(5, 4).is_err());
    }

    #[test]
    fn large_runs_stay_finite() {
        let ci = binomial_ci(8_400, 10_000_000).unwrap();
        let s = (8.4e-4f64 * (1.0 - 8.4e-4) / 1e7).sqrt();
        assert!((ci.sigma_plus / s - 1.0).abs() < 0.02);
    }
}
