//! Heralded single-excitation figures derived from g⁽²⁾_om.

use serde::Serialize;

use crate::error::AnalysisError;

/// Below this cross-correlation the 4/(g−1) estimate is flagged approximate.
pub const STRONG_CORRELATION: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeraldedAutocorr {
    pub value: f64,
    /// g_om is too small for the estimate to be reliable.
    pub approximate: bool,
}

/// Heralded autocorrelation of the mechanical state, ≈ 4/(g_om − 1) for
/// strongly correlated pairs.
pub fn heralded_autocorr(g_om: f64) -> Result<HeraldedAutocorr, AnalysisError> {
    if !(g_om > 1.0) {
        return Err(AnalysisError::InvalidInput {
            name: "g_om",
            value: g_om,
            reason: "must exceed 1",
        });
    }
    Ok(HeraldedAutocorr {
        value: 4.0 / (g_om - 1.0),
        approximate: g_om < STRONG_CORRELATION,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FockPopulations {
    pub p0: f64,
    pub p1: f64,
    pub p_gt1: f64,
}

/// Splits the heralded state into vacuum (false heralds), one excitation and
/// more, using p0 = p_false, p_{>1} = g_her p1² / 2 and normalization.
pub fn fock_fidelity(g_her: f64, p_false: f64) -> Result<FockPopulations, AnalysisError> {
    if !(g_her >= 0.0) || !g_her.is_finite() {
        return Err(AnalysisError::InvalidInput {
            name: "g_her",
            value: g_her,
            reason: "must be finite and non-negative",
        });
    }
    if !(0.0..1.0).contains(&p_false) {
        return Err(AnalysisError::InvalidInput {
            name: "p_false",
            value: p_false,
            reason: "must lie in [0, 1)",
        });
    }
    let rest = 1.0 - p_false;
    // (g/2) p1² + p1 − rest = 0, positive root written to stay exact as g → 0
    let p1 = 2.0 * rest / (1.0 + (1.0 + 2.0 * g_her * rest).sqrt());
    let p_gt1 = rest - p1;
    if !(0.0..=1.0).contains(&p1) || p_gt1 < -1e-15 {
        return Err(AnalysisError::NoRoot(format!(
            "g_her = {g_her}, p_false = {p_false} gives p1 = {p1}"
        )));
    }
    Ok(FockPopulations {
        p0: p_false,
        p1,
        p_gt1: p_gt1.max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_chain() {
        let h = heralded_autocorr(19.6).unwrap();
        assert!((h.value - 0.215).abs() < 5e-4);
        assert!(!h.approximate);
        assert!(heralded_autocorr(3.0).unwrap().approximate);
        assert!(heralded_autocorr(1e12).unwrap().value < 1e-11);
        assert!(heralded_autocorr(1.0).is_err());

        let f = fock_fidelity(0.215, 0.04).unwrap();
        assert!((f.p1 - 0.877).abs() < 5e-4, "{f:?}");
        assert!((f.p0 + f.p1 + f.p_gt1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trivial_limits() {
        assert_eq!(fock_fidelity(0.0, 0.0).unwrap().p1, 1.0);
        assert!((fock_fidelity(0.0, 0.04).unwrap().p1 - 0.96).abs() < 1e-15);
        assert!(fock_fidelity(-1.0, 0.0).is_err());
        assert!(fock_fidelity(0.2, 1.0).is_err());
    }
}
