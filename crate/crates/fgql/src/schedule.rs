//! Tuning-parameter schedules `μ_n = κ·n^e` and their admissibility checks.
//!
//! Admissibility is decided purely on exponents: whether a power-law
//! schedule satisfies the required limits never depends on the constant κ.
//! Two regimes are supported. With a fixed number of groups the schedule
//! must satisfy
//!
//! ```text
//! μ_n → ∞,   n^{−1/2} μ_n → 0,   n^{(γ−1)/2} μ_n → ∞,
//! ```
//!
//! and with group count growing as `p = ⌊n^c⌋` it must satisfy
//!
//! ```text
//! μ_n → ∞,   μ_n n^{(c−1)/2 − αγ} → 0,   μ_n n^{(−c(1+γ)+γ−1)/2} → ∞,
//! ```
//!
//! where `α` is the exponent of the slowest admissible decay of the
//! smallest active group norm. At `c = α = 0` the growing-regime
//! conditions reduce exactly to the last two fixed-regime ones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    FixedP,
    GrowingP,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::FixedP => write!(f, "fixed"),
            Regime::GrowingP => write!(f, "growing"),
        }
    }
}

/// Power-law tuning schedule `μ⁽ᵐ⁾_n = κₘ·n^e` for `m = 1, 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningSchedule {
    pub regime: Regime,
    /// Common exponent `e` of both tuning parameters.
    pub exponent: f64,
    /// Constant in front of the group penalty schedule.
    pub kappa1: f64,
    /// Constant in front of the fusion penalty schedule.
    pub kappa2: f64,
    pub gamma: f64,
    /// Group growth exponent, zero in the fixed regime.
    pub c: f64,
    /// Signal-floor exponent, zero in the fixed regime.
    pub alpha: f64,
}

impl TuningSchedule {
    /// Concrete `(μ⁽¹⁾, μ⁽²⁾)` at sample size `n`.
    pub fn mu_at(&self, n: usize) -> (f64, f64) {
        let base = (n as f64).powf(self.exponent);
        (self.kappa1 * base, self.kappa2 * base)
    }

    pub fn is_admissible(&self) -> bool {
        validate_schedule(self).iter().all(|r| r.satisfied)
    }
}

/// One tuning condition with its exponent inequality and truth value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRecord {
    /// The limit the condition encodes, e.g. `"mu_n -> infinity"`.
    pub condition: String,
    /// The equivalent strict inequality on exponents, with values plugged in.
    pub inequality: String,
    pub satisfied: bool,
}

/// Checks every tuning condition of the schedule's regime symbolically.
///
/// Returns one record per condition; the schedule is admissible exactly
/// when no record is violated. The verdicts are invariant under rescaling
/// of `κ₁`, `κ₂`.
pub fn validate_schedule(schedule: &TuningSchedule) -> Vec<ConditionRecord> {
    let e = schedule.exponent;
    let gamma = schedule.gamma;
    let mut records = vec![ConditionRecord {
        condition: "mu_n -> infinity".into(),
        inequality: format!("e > 0 with e = {e}"),
        satisfied: e > 0.0,
    }];
    match schedule.regime {
        Regime::FixedP => {
            records.push(ConditionRecord {
                condition: "n^(-1/2) mu_n -> 0".into(),
                inequality: format!("e < 1/2 with e = {e}"),
                satisfied: e < 0.5,
            });
            let lhs = e + (gamma - 1.0) / 2.0;
            records.push(ConditionRecord {
                condition: "n^((gamma-1)/2) mu_n -> infinity".into(),
                inequality: format!("e + (gamma-1)/2 > 0 with value {lhs}"),
                satisfied: lhs > 0.0,
            });
        }
        Regime::GrowingP => {
            let (c, alpha) = (schedule.c, schedule.alpha);
            let upper = (1.0 - c) / 2.0 + alpha * gamma;
            records.push(ConditionRecord {
                condition: "mu_n n^((c-1)/2 - alpha*gamma) -> 0".into(),
                inequality: format!("e < (1-c)/2 + alpha*gamma = {upper} with e = {e}"),
                satisfied: e < upper,
            });
            let lower = (c * (1.0 + gamma) - gamma + 1.0) / 2.0;
            records.push(ConditionRecord {
                condition: "mu_n n^((-c(1+gamma)+gamma-1)/2) -> infinity".into(),
                inequality: format!(
                    "e > (c(1+gamma)-gamma+1)/2 = {lower} with e = {e}"
                ),
                satisfied: e > lower,
            });
        }
    }
    records
}

/// Default admissible schedule for the requested regime.
///
/// Picks the midpoint of the feasible exponent interval (for the fixed
/// regime with `γ = 1` this is `e = 1/4`) and `κ₁ = κ₂ = 1`, returning the
/// schedule together with its concrete tuning pair at `n`.
pub fn default_schedule(
    n: usize,
    gamma: f64,
    regime: Regime,
    c: f64,
    alpha: f64,
) -> Result<(TuningSchedule, (f64, f64))> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma must be strictly positive, got {gamma}"
        )));
    }
    let (c, alpha, lower, upper) = match regime {
        Regime::FixedP => {
            let lower = (0.0f64).max((1.0 - gamma) / 2.0);
            (0.0, 0.0, lower, 0.5)
        }
        Regime::GrowingP => {
            if !(0.0..1.0).contains(&c) {
                return Err(Error::InvalidParameter(format!(
                    "growth exponent c must lie in [0, 1), got {c}"
                )));
            }
            if !(alpha > (c - 1.0) / 2.0) {
                return Err(Error::InvalidParameter(format!(
                    "alpha must exceed (c-1)/2 = {}, got {alpha}",
                    (c - 1.0) / 2.0
                )));
            }
            let lower = (0.0f64).max((c * (1.0 + gamma) - gamma + 1.0) / 2.0);
            let upper = (1.0 - c) / 2.0 + alpha * gamma;
            (c, alpha, lower, upper)
        }
    };
    if !(lower < upper) {
        return Err(Error::InfeasibleSchedule(format!(
            "need e > {lower} (divergence bound) and e < {upper} (decay bound) \
             simultaneously for (c, alpha, gamma) = ({c}, {alpha}, {gamma})"
        )));
    }
    let schedule = TuningSchedule {
        regime,
        exponent: (lower + upper) / 2.0,
        kappa1: 1.0,
        kappa2: 1.0,
        gamma,
        c,
        alpha,
    };
    debug_assert!(schedule.is_admissible());
    Ok((schedule, schedule.mu_at(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fixed(e: f64, gamma: f64) -> TuningSchedule {
        TuningSchedule {
            regime: Regime::FixedP,
            exponent: e,
            kappa1: 1.0,
            kappa2: 1.0,
            gamma,
            c: 0.0,
            alpha: 0.0,
        }
    }

    fn growing(e: f64, gamma: f64, c: f64, alpha: f64) -> TuningSchedule {
        TuningSchedule {
            regime: Regime::GrowingP,
            exponent: e,
            kappa1: 1.0,
            kappa2: 1.0,
            gamma,
            c,
            alpha,
        }
    }

    #[test]
    fn default_fixed_quarter_exponent() {
        let (schedule, (mu1, mu2)) =
            default_schedule(10_000, 1.0, Regime::FixedP, 0.0, 0.0).unwrap();
        assert_eq!(schedule.exponent, 0.25);
        assert!((mu1 - 10.0).abs() < 1e-12);
        assert_eq!(mu1, mu2);
    }

    #[test]
    fn fixed_conditions_match_symbolic_truth() {
        let records = validate_schedule(&fixed(0.25, 1.0));
        assert!(records.iter().all(|r| r.satisfied));

        let records = validate_schedule(&fixed(0.0, 1.0));
        assert!(!records[0].satisfied); // constant schedule never diverges
        let records = validate_schedule(&fixed(0.5, 1.0));
        assert!(!records[1].satisfied); // boundary of the root-n condition
    }

    #[test]
    fn growing_reduces_to_fixed_at_c_alpha_zero() {
        for e in [0.05, 0.25, 0.45, 0.55] {
            for gamma in [0.5, 1.0, 2.0] {
                let g = validate_schedule(&growing(e, gamma, 0.0, 0.0));
                let f = validate_schedule(&fixed(e, gamma));
                assert_eq!(g[1].satisfied, f[1].satisfied, "e={e} gamma={gamma}");
                assert_eq!(g[2].satisfied, f[2].satisfied, "e={e} gamma={gamma}");
            }
        }
    }

    #[test]
    fn coinciding_bounds_are_infeasible() {
        let err = default_schedule(1000, 1.0, Regime::GrowingP, 0.4, 0.1).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("0.4"), "error should name the bounds: {msg}");
    }

    #[test]
    fn growing_feasible_case() {
        let (schedule, _) = default_schedule(1000, 1.0, Regime::GrowingP, 0.4, 0.2).unwrap();
        assert!(schedule.is_admissible());
        assert!((schedule.exponent - 0.45).abs() < 1e-12);
    }

    #[test]
    fn alpha_below_a5_bound_rejected() {
        assert!(default_schedule(1000, 1.0, Regime::GrowingP, 0.4, -0.4).is_err());
    }

    proptest! {
        // Rescaling the constants never changes any verdict.
        #[test]
        fn kappa_invariance(
            e in -0.5f64..1.0,
            gamma in 0.1f64..3.0,
            c in 0.0f64..0.99,
            alpha in 0.0f64..1.0,
            kappa in 0.01f64..100.0,
        ) {
            let mut a = growing(e, gamma, c, alpha);
            let mut b = a;
            b.kappa1 = kappa;
            b.kappa2 = kappa * 3.0;
            prop_assert_eq!(validate_schedule(&a), validate_schedule(&b));
            a.regime = Regime::FixedP;
            let mut bf = a;
            bf.kappa1 = kappa;
            prop_assert_eq!(validate_schedule(&a), validate_schedule(&bf));
        }
    }
}
