//! Closed-form proximal operators for the three nonsmooth objective pieces.
//!
//! Each operator is exact: the check-loss prox is the piecewise shift with a
//! dead zone at the kink, and the group-norm pieces share block soft
//! thresholding with an explicit zero branch so that selected-away groups
//! come out exactly zero. Ties on the threshold map to zero.

use crate::design::check_tau;
use crate::error::{Error, Result};

/// Proximal operator of the check loss: the unique minimizer of
/// `step·ρ_τ(x) + ½(x − a)²`.
pub fn prox_check(a: f64, step: f64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "prox step must be strictly positive, got {step}"
        )));
    }
    if !a.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "prox anchor must be finite, got {a}"
        )));
    }
    Ok(prox_check_unchecked(a, step, tau))
}

#[inline]
pub(crate) fn prox_check_unchecked(a: f64, step: f64, tau: f64) -> f64 {
    if a > step * tau {
        a - step * tau
    } else if a < -step * (1.0 - tau) {
        a + step * (1.0 - tau)
    } else {
        0.0
    }
}

/// Block soft thresholding: the minimizer of `threshold·‖x‖ + ½‖x − v‖²`.
///
/// Returns the zero vector when `‖v‖ ≤ threshold` (ties shrink to zero),
/// otherwise `v` scaled by `1 − threshold/‖v‖`.
pub fn block_soft_threshold(v: &[f64], threshold: f64) -> Result<Vec<f64>> {
    if !(threshold >= 0.0) || !threshold.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "threshold must be finite and nonnegative, got {threshold}"
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(
            "block soft threshold input must be finite".into(),
        ));
    }
    let mut out = v.to_vec();
    block_soft_threshold_in_place(&mut out, threshold);
    Ok(out)
}

#[inline]
pub(crate) fn block_soft_threshold_in_place(v: &mut [f64], threshold: f64) {
    if threshold == 0.0 {
        return;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= threshold {
        v.fill(0.0);
    } else {
        let scale = 1.0 - threshold / norm;
        for x in v.iter_mut() {
            *x *= scale;
        }
    }
}
