//! Classical (Cauchy–Schwarz) bound √(g_oo · g_mm) from the likelihoods of
//! the two autocorrelations, and the violation test against a measured
//! cross-correlation.

use serde::Serialize;

use super::correlation::CorrelationEstimate;
use crate::error::AnalysisError;

pub const GRID_POINTS: usize = 4096;
pub const GRID_MIN: f64 = 1e-3;
pub const GRID_MAX: f64 = 1e3;

/// One autocorrelation: raw counts, or a value known exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum AutocorrelationInput {
    Counts {
        coincidences: u64,
        singles: [u64; 2],
        trials: u64,
    },
    Exact(f64),
}

impl From<&CorrelationEstimate> for AutocorrelationInput {
    fn from(e: &CorrelationEstimate) -> Self {
        AutocorrelationInput::Counts {
            coincidences: e.coincidences,
            singles: e.singles,
            trials: e.trials,
        }
    }
}

/// Relative coincidence likelihood of g, L(g·c)/L_max, with c the product of
/// the ML single rates.
#[derive(Clone, Copy, Debug)]
struct LogLikelihood {
    n: f64,
    t: f64,
    c: f64,
    p_ml: f64,
}

impl LogLikelihood {
    fn new(coincidences: u64, singles: [u64; 2], trials: u64) -> Result<Self, AnalysisError> {
        if trials == 0 {
            return Err(AnalysisError::NoTrials);
        }
        if singles[0] == 0 || singles[1] == 0 {
            return Err(AnalysisError::ZeroSingles("autocorrelation"));
        }
        if coincidences > singles[0].min(singles[1]) || singles.iter().any(|&s| s > trials) {
            return Err(AnalysisError::CountsExceedTrials {
                events: coincidences.max(singles[0]).max(singles[1]),
                trials,
            });
        }
        let t = trials as f64;
        Ok(Self {
            n: coincidences as f64,
            t,
            c: singles[0] as f64 / t * singles[1] as f64 / t,
            p_ml: coincidences as f64 / t,
        })
    }

    fn ml_value(&self) -> f64 {
        self.p_ml / self.c
    }

    /// Relative likelihood at ln g = u.
    fn at(&self, u: f64) -> f64 {
        let p = self.c * u.exp();
        if p >= 1.0 {
            return if self.n == self.t { 1.0 } else { 0.0 };
        }
        let mut l = 0.0;
        if self.n > 0.0 {
            l += self.n * (p / self.p_ml).ln();
        }
        if self.t > self.n {
            l += (self.t - self.n) * ((-p).ln_1p() - (-self.p_ml).ln_1p());
        }
        l.exp()
    }
}

#[derive(Clone, Copy, Debug)]
enum Side {
    Exact(f64),
    Likelihood(LogLikelihood),
}

impl Side {
    fn from_input(x: &AutocorrelationInput) -> Result<Self, AnalysisError> {
        match *x {
            AutocorrelationInput::Exact(v) => {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(AnalysisError::InvalidInput {
                        name: "autocorrelation",
                        value: v,
                        reason: "exact value must be positive and finite",
                    });
                }
                Ok(Side::Exact(v))
            }
            AutocorrelationInput::Counts {
                coincidences,
                singles,
                trials,
            } => Ok(Side::Likelihood(LogLikelihood::new(coincidences, singles, trials)?)),
        }
    }

    fn ml_value(&self) -> f64 {
        match self {
            Side::Exact(v) => *v,
            Side::Likelihood(l) => l.ml_value(),
        }
    }
}

/// Log-likelihood below its peak at which a side's support is cut.
const SUPPORT_DEPTH: f64 = 80.0;
/// Minimum nodes across the narrowest support.
const NODES_PER_SUPPORT: f64 = 256.0;

fn default_step() -> f64 {
    (GRID_MAX.ln() - GRID_MIN.ln()) / (GRID_POINTS - 1) as f64
}

/// Nodes `lo + i·h`, i < n, carrying the relative likelihood of one side.
/// An exact side is a single node of weight 1/h, so that the discrete
/// convolution reproduces the other side unchanged.
struct Axis {
    lo: f64,
    values: Vec<f64>,
}

impl Side {
    /// ln g interval where the likelihood exceeds e^{−SUPPORT_DEPTH} of its
    /// peak, clipped to the grid range. Exact sides return a point.
    fn support(&self) -> (f64, f64) {
        let (u_min, u_max) = (GRID_MIN.ln(), GRID_MAX.ln());
        let l = match self {
            Side::Exact(x) => return (x.ln(), x.ln()),
            Side::Likelihood(l) => l,
        };
        let mode = if l.n > 0.0 { l.ml_value().ln().clamp(u_min, u_max) } else { u_min };
        let deep = |u: f64| l.at(u) < (-SUPPORT_DEPTH).exp();
        let edge = |mut inside: f64, mut outside: f64| {
            if !deep(outside) {
                return outside;
            }
            for _ in 0..100 {
                let mid = 0.5 * (inside + outside);
                if deep(mid) {
                    outside = mid;
                } else {
                    inside = mid;
                }
            }
            outside
        };
        (edge(mode, u_min), edge(mode, u_max))
    }

    fn axis(&self, (lo, hi): (f64, f64), h: f64) -> Axis {
        match self {
            Side::Exact(_) => Axis { lo, values: vec![1.0 / h] },
            Side::Likelihood(l) => {
                let n = ((hi - lo) / h).ceil() as usize + 1;
                Axis {
                    lo,
                    values: (0..n).map(|i| l.at(lo + i as f64 * h)).collect(),
                }
            }
        }
    }
}

/// Likelihood of t = ln(g_oo g_mm) as the convolution of the two
/// log-domain likelihoods. The step is the 4096-point grid step unless a
/// likelihood is too narrow for it, in which case it shrinks so that the
/// narrowest support spans NODES_PER_SUPPORT nodes.
struct Convolution {
    h: f64,
    a: Side,
    b: Side,
    a_axis: Axis,
    b_axis: Axis,
}

impl Convolution {
    fn new(a: Side, b: Side) -> Self {
        let (sa, sb) = (a.support(), b.support());
        let narrowest = [(&a, sa), (&b, sb)]
            .iter()
            .filter(|(s, _)| matches!(s, Side::Likelihood(_)))
            .map(|(_, (lo, hi))| hi - lo)
            .fold(f64::INFINITY, f64::min);
        let h = default_step().min(narrowest / NODES_PER_SUPPORT);
        let a_axis = a.axis(sa, h);
        let b_axis = b.axis(sb, h);
        Self { h, a, b, a_axis, b_axis }
    }

    /// Node k of the sum grid.
    fn t(&self, k: usize) -> f64 {
        self.a_axis.lo + self.b_axis.lo + k as f64 * self.h
    }

    /// Continuous evaluation at any t.
    fn eval(&self, t: f64) -> f64 {
        match (&self.a, &self.b) {
            (Side::Likelihood(_), Side::Likelihood(lb)) => {
                self.h
                    * self
                        .a_axis
                        .values
                        .iter()
                        .enumerate()
                        .map(|(i, fa)| {
                            if *fa > 0.0 {
                                fa * lb.at(t - self.a_axis.lo - i as f64 * self.h)
                            } else {
                                0.0
                            }
                        })
                        .sum::<f64>()
            }
            (Side::Exact(x), Side::Likelihood(l)) | (Side::Likelihood(l), Side::Exact(x)) => {
                l.at(t - x.ln())
            }
            (Side::Exact(_), Side::Exact(_)) => unreachable!("handled before convolving"),
        }
    }

    /// Values on the sum grid.
    fn on_grid(&self) -> Vec<f64> {
        let (fa, fb) = (&self.a_axis.values, &self.b_axis.values);
        let mut out = vec![0.0; fa.len() + fb.len() - 1];
        for (i, a) in fa.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in fb.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        out.iter_mut().for_each(|v| *v *= self.h);
        out
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Bound g_cb = √(g_oo g_mm) with ML value and 68 % interval. The
/// likelihoods of ln g_oo and ln g_mm are convolved on a log grid; the ML
/// is the peak of the convolution, and the interval edges enclose the central
/// 68 % of its mass measured along g_cb.
pub fn classical_bound(
    auto_write: &AutocorrelationInput,
    auto_read: &AutocorrelationInput,
) -> Result<CorrelationEstimate, AnalysisError> {
    let a = Side::from_input(auto_write)?;
    let b = Side::from_input(auto_read)?;
    let zero = |s: &Side| matches!(s, Side::Likelihood(l) if l.n == 0.0);
    if zero(&a) && zero(&b) {
        return Err(AnalysisError::DegenerateBound);
    }
    // the bound has no counts of its own; they live on the two inputs
    let (coincidences, singles, trials) = (0, [0, 0], 0);
    if let (Side::Exact(x), Side::Exact(y)) = (&a, &b) {
        return Ok(CorrelationEstimate {
            value: (x * y).sqrt(),
            sigma_minus: 0.0,
            sigma_plus: 0.0,
            coincidences,
            singles,
            trials,
        });
    }

    let conv = Convolution::new(a, b);
    let nodes = conv.on_grid();
    let k_max = nodes
        .iter()
        .enumerate()
        .fold(0, |best, (k, v)| if *v > nodes[best] { k } else { best });

    // an autocorrelation with no coincidences has ML value 0, so does the bound
    let value = if zero(&a) || zero(&b) {
        0.0
    } else {
        let lo = conv.t(k_max.saturating_sub(1));
        let hi = conv.t((k_max + 1).min(nodes.len() - 1));
        (0.5 * golden_max(|t| conv.eval(t), lo, hi)).exp()
    };

    // mass along g_cb = e^{t/2}: dg = ½ e^{t/2} dt
    let g: Vec<f64> = (0..nodes.len()).map(|k| (0.5 * conv.t(k)).exp()).collect();
    let w: Vec<f64> = nodes.iter().zip(&g).map(|(f, g)| f * 0.5 * g).collect();
    let mut cum = vec![0.0; nodes.len()];
    for k in 1..nodes.len() {
        cum[k] = cum[k - 1] + 0.5 * (w[k] + w[k - 1]) * conv.h;
    }
    let total = *cum.last().unwrap();
    if !(total > 0.0) {
        return Err(AnalysisError::DegenerateBound);
    }
    let quantile = |q: f64| {
        let target = q * total;
        let k = cum.partition_point(|&c| c < target).clamp(1, cum.len() - 1);
        let (c0, c1) = (cum[k - 1], cum[k]);
        let frac = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.0 };
        g[k - 1] + frac * (g[k] - g[k - 1])
    };
    let lower = quantile(0.16);
    let upper = quantile(0.84);
    Ok(CorrelationEstimate {
        value,
        sigma_minus: (value - lower).max(0.0),
        sigma_plus: (upper - value).max(0.0),
        coincidences,
        singles,
        trials,
    })
}

/// √(g_oo,ML · g_mm,ML) from the individual ML values.
pub fn naive_bound(auto_write: &AutocorrelationInput, auto_read: &AutocorrelationInput) -> Result<f64, AnalysisError> {
    Ok((Side::from_input(auto_write)?.ml_value() * Side::from_input(auto_read)?.ml_value()).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub violated: bool,
    /// Gap between the cross-correlation lower edge and the bound upper edge.
    pub separation: f64,
    /// `separation` in units of the summed facing half-widths.
    pub margin: f64,
}

/// Non-classical iff the cross-correlation interval lies entirely above the
/// bound interval.
pub fn cauchy_schwarz_test(cross: &CorrelationEstimate, bound: &CorrelationEstimate) -> Verdict {
    let separation = cross.lower() - bound.upper();
    let width = cross.sigma_minus + bound.sigma_plus;
    let margin = if width > 0.0 {
        separation / width
    } else {
        separation.signum() * if separation == 0.0 { 0.0 } else { f64::INFINITY }
    };
    Verdict {
        violated: separation > 0.0,
        separation,
        margin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(coincidences: u64, singles: [u64; 2], trials: u64) -> AutocorrelationInput {
        AutocorrelationInput::Counts {
            coincidences,
            singles,
            trials,
        }
    }

    fn est(value: f64, m: f64, p: f64) -> CorrelationEstimate {
        CorrelationEstimate {
            value,
            sigma_minus: m,
            sigma_plus: p,
            coincidences: 0,
            singles: [0, 0],
            trials: 0,
        }
    }

    #[test]
    fn point_masses_give_exact_bound() {
        let b = classical_bound(&AutocorrelationInput::Exact(2.0), &AutocorrelationInput::Exact(2.0)).unwrap();
        assert_eq!(b.value, 2.0);
        assert_eq!((b.sigma_minus, b.sigma_plus), (0.0, 0.0));
    }

    #[test]
    fn exact_side_shifts_the_other() {
        let c = counts(400, [10_000, 10_000], 500_000);
        let b = classical_bound(&AutocorrelationInput::Exact(1.0), &c).unwrap();
        assert!((b.value - 2.0f64.sqrt()).abs() < 1e-6, "{b:?}");
    }

    #[test]
    fn ml_lies_below_product_of_mls() {
        for (a, b) in [
            (counts(30, [1000, 1200], 100_000), counts(5, [300, 400], 100_000)),
            (counts(3, [100, 100], 10_000), counts(1, [50, 60], 10_000)),
            (counts(2000, [30_000, 30_000], 1_000_000), counts(2000, [30_000, 30_000], 1_000_000)),
            // likelihoods narrower than the default grid step
            (counts(20_387, [20_387, 87_201], 221_891), counts(323_391, [323_391, 325_195], 794_962)),
            (counts(382_049, [462_753, 382_049], 931_173), counts(47_852, [47_852, 206_237], 503_887)),
        ] {
            let cb = classical_bound(&a, &b).unwrap();
            let naive = naive_bound(&a, &b).unwrap();
            assert!(cb.value <= naive, "{} > {naive}", cb.value);
            assert!(cb.value > 0.0);
        }
    }

    #[test]
    fn zero_counts() {
        let z = counts(0, [100, 100], 1_000_000);
        assert_eq!(classical_bound(&z, &z), Err(AnalysisError::DegenerateBound));
        let b = classical_bound(&counts(20, [1000, 1000], 100_000), &z).unwrap();
        assert_eq!(b.value, 0.0);
        assert_eq!(b.sigma_minus, 0.0);
        assert!(b.sigma_plus > 0.0);
    }

    #[test]
    fn verdicts() {
        let v = cauchy_schwarz_test(&est(8.0, 0.5, 0.6), &est(2.09, 0.16, 0.23));
        assert!(v.violated && v.margin > 0.0);
        let v = cauchy_schwarz_test(&est(1.04, 0.04, 0.04), &est(2.09, 0.16, 0.23));
        assert!(!v.violated);
        let e = est(2.0, 0.1, 0.1);
        let v = cauchy_schwarz_test(&e, &e);
        assert!(!v.violated && v.margin <= 0.0);
    }
}
