//! Adaptive penalty weights built from the pilot fit.
//!
//! The group weight is `‖β̃ⱼ‖^{−γ}` and the fusion weight is
//! `‖β̃ⱼ − β̃ⱼ₋₁‖^{−γ}`; a tiny floor keeps both finite when a pilot norm is
//! exactly zero — a huge finite weight plus the solver's exact-zero prox has
//! the same selection effect as an infinite one.

use serde::{Deserialize, Serialize};

use crate::design::{GroupPartition, GroupedDesign, SolverControls};
use crate::error::{Error, Result};
use crate::solver::FitResult;

/// Default floor under pilot norms before inversion.
pub const DEFAULT_WEIGHT_CAP: f64 = 1e-10;

/// Per-group and per-pair penalty multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveWeights {
    partition: GroupPartition,
    w1: Vec<f64>,
    /// Entry `j - 2` weights the pair `(j−1, j)`, `j = 2..=p`.
    w2: Vec<f64>,
    pub gamma: f64,
    cap_applied_w1: Vec<bool>,
    cap_applied_w2: Vec<bool>,
}

impl AdaptiveWeights {
    /// Builds weights from explicit values; mainly for tests and for
    /// penalty-free fits.
    pub fn from_raw(
        partition: GroupPartition,
        w1: Vec<f64>,
        w2: Vec<f64>,
        gamma: f64,
    ) -> Result<Self> {
        let p = partition.num_groups();
        if w1.len() != p || w2.len() != p.saturating_sub(1) {
            return Err(Error::DimensionMismatch(format!(
                "weights need {p} group entries and {} pair entries, got {} and {}",
                p - 1,
                w1.len(),
                w2.len()
            )));
        }
        if w1.iter().chain(w2.iter()).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let cap_applied_w1 = vec![false; w1.len()];
        let cap_applied_w2 = vec![false; w2.len()];
        Ok(Self {
            partition,
            w1,
            w2,
            gamma,
            cap_applied_w1,
            cap_applied_w2,
        })
    }

    /// Unit weights on every group and pair.
    pub fn uniform(partition: GroupPartition) -> Self {
        let p = partition.num_groups();
        Self::from_raw(partition, vec![1.0; p], vec![1.0; p - 1], 1.0).unwrap()
    }

    pub fn partition(&self) -> &GroupPartition {
        &self.partition
    }

    /// Group weight for 1-based group `j`.
    pub fn w1(&self, j: usize) -> f64 {
        self.w1[j - 1]
    }

    /// Pair weight for the pair `(j−1, j)`, `j = 2..=p`.
    pub fn w2(&self, j: usize) -> f64 {
        self.w2[j - 2]
    }

    pub fn w1_slice(&self) -> &[f64] {
        &self.w1
    }

    pub fn w2_slice(&self) -> &[f64] {
        &self.w2
    }

    /// True when the floor was active for group `j`.
    pub fn cap_applied_w1(&self, j: usize) -> bool {
        self.cap_applied_w1[j - 1]
    }

    /// True when the floor was active for the pair `(j−1, j)`.
    pub fn cap_applied_w2(&self, j: usize) -> bool {
        self.cap_applied_w2[j - 2]
    }

    pub fn check_partition(&self, other: &GroupPartition) -> Result<()> {
        if &self.partition != other {
            return Err(Error::DimensionMismatch(
                "weight partition does not match the coefficients".into(),
            ));
        }
        Ok(())
    }
}

/// Computes adaptive weights from a pilot fit.
///
/// `w1ⱼ = max(‖β̃ⱼ‖, cap)^{−γ}` and `w2ⱼ = max(‖β̃ⱼ − β̃ⱼ₋₁‖, cap)^{−γ}`,
/// with per-entry flags recording wherever the floor was the binding value.
pub fn compute_weights(pilot: &FitResult, gamma: f64, cap: f64) -> Result<AdaptiveWeights> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma must be strictly positive, got {gamma}"
        )));
    }
    if !(cap > 0.0) || !cap.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "weight cap must be strictly positive, got {cap}"
        )));
    }
    let beta = &pilot.coefficients;
    let p = beta.num_groups();
    let mut w1 = Vec::with_capacity(p);
    let mut w2 = Vec::with_capacity(p - 1);
    let mut cap_applied_w1 = Vec::with_capacity(p);
    let mut cap_applied_w2 = Vec::with_capacity(p - 1);
    for j in 1..=p {
        let norm = beta.group_norm(j);
        cap_applied_w1.push(norm < cap);
        w1.push(norm.max(cap).powf(-gamma));
    }
    for j in 2..=p {
        let norm = beta.pair_difference_norm(j);
        cap_applied_w2.push(norm < cap);
        w2.push(norm.max(cap).powf(-gamma));
    }
    Ok(AdaptiveWeights {
        partition: beta.partition().clone(),
        w1,
        w2,
        gamma,
        cap_applied_w1,
        cap_applied_w2,
    })
}

/// Result of the data-driven scaling search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KappaSearch {
    pub best_kappa: f64,
    /// `(kappa, held-out quantile loss)` for every candidate, ascending kappa.
    pub candidates: Vec<(f64, f64)>,
}

/// Grid search over a scaling `κ ∈ {2⁻⁴, …, 2⁴}` of the tuning pair,
/// scored by held-out quantile loss on every fifth observation.
///
/// This is plain validation machinery around the estimator, not part of the
/// asymptotic theory; it exists because rate conditions alone do not pin a
/// finite-sample constant.
pub fn grid_search_kappa(
    data: &GroupedDesign,
    tau: f64,
    gamma: f64,
    base_mu: (f64, f64),
    controls: SolverControls,
) -> Result<KappaSearch> {
    let n = data.n();
    if n < 10 {
        return Err(Error::InvalidParameter(
            "kappa search needs at least 10 observations".into(),
        ));
    }
    let holdout: Vec<usize> = (0..n).filter(|i| i % 5 == 4).collect();
    let train: Vec<usize> = (0..n).filter(|i| i % 5 != 4).collect();
    let train_data = subset_design(data, &train)?;
    let holdout_data = subset_design(data, &holdout)?;

    let pilot = crate::solver::pilot_fit(&train_data, tau, controls)?;
    let weights = compute_weights(&pilot, gamma, DEFAULT_WEIGHT_CAP)?;

    let mut candidates = Vec::new();
    let mut best = (f64::INFINITY, f64::INFINITY);
    for exp in -4..=4 {
        let kappa = (exp as f64).exp2();
        let config = crate::design::FitConfig {
            tau,
            mu1: kappa * base_mu.0,
            mu2: kappa * base_mu.1,
            gamma,
            solver: controls,
        };
        let fitted = crate::solver::fit(&train_data, &weights, &config)?;
        let beta = crate::design::GroupedCoefficients::new(
            fitted.coefficients.values().to_owned(),
            holdout_data.partition().clone(),
        )?;
        let loss = crate::loss::quantile_process(&beta, &holdout_data, tau)?;
        candidates.push((kappa, loss));
        if loss < best.1 {
            best = (kappa, loss);
        }
    }
    Ok(KappaSearch {
        best_kappa: best.0,
        candidates,
    })
}

fn subset_design(data: &GroupedDesign, rows: &[usize]) -> Result<GroupedDesign> {
    let x = data.x();
    let mut sub = ndarray::Array2::<f64>::zeros((rows.len(), x.ncols()));
    let mut y = ndarray::Array1::<f64>::zeros(rows.len());
    for (out_i, &i) in rows.iter().enumerate() {
        y[out_i] = data.y()[i];
        sub.row_mut(out_i).assign(&x.row(i));
    }
    GroupedDesign::new(y, sub, data.partition().sizes().to_vec())
}
