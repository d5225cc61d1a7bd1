//! Check-function loss and exact evaluation of the penalized objective.
//!
//! All sums over observations use compensated (Neumaier) accumulation so the
//! objective stays trustworthy to near machine precision at `n ~ 10⁴`, which
//! the solver-certification tolerances rely on.

use crate::design::{check_tau, FitConfig, GroupedCoefficients, GroupedDesign};
use crate::error::{Error, Result};
use crate::weights::AdaptiveWeights;

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Check (pinball) loss `ρ_τ(u) = u·(τ − 1{u<0})`.
///
/// Zero exactly at `u = 0`, strictly positive elsewhere.
pub fn check_loss(u: f64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    if !u.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "check loss argument must be finite, got {u}"
        )));
    }
    Ok(check_loss_unchecked(u, tau))
}

#[inline]
pub(crate) fn check_loss_unchecked(u: f64, tau: f64) -> f64 {
    if u < 0.0 {
        u * (tau - 1.0)
    } else {
        u * tau
    }
}

/// Unpenalized quantile objective `Σᵢ ρ_τ(yᵢ − xᵢᵗβ)`.
pub fn quantile_process(
    beta: &GroupedCoefficients,
    data: &GroupedDesign,
    tau: f64,
) -> Result<f64> {
    check_tau(tau)?;
    if !beta.same_partition(data.partition()) {
        return Err(Error::DimensionMismatch(
            "coefficient partition does not match the design".into(),
        ));
    }
    let predictions = data.x().dot(&beta.values());
    let mut acc = CompensatedSum::default();
    for (yi, pi) in data.y().iter().zip(predictions.iter()) {
        acc.add(check_loss_unchecked(yi - pi, tau));
    }
    Ok(acc.value())
}

/// Full penalized objective
/// `Q(β) = G(β) + μ⁽¹⁾ Σⱼ w⁽¹⁾ⱼ ‖βⱼ‖ + μ⁽²⁾ Σⱼ₌₂ w⁽²⁾ⱼ ‖βⱼ − βⱼ₋₁‖`.
///
/// Reduces to [`quantile_process`] when both tuning parameters are zero.
pub fn penalized_objective(
    beta: &GroupedCoefficients,
    data: &GroupedDesign,
    weights: &AdaptiveWeights,
    config: &FitConfig,
) -> Result<f64> {
    config.validate()?;
    weights.check_partition(beta.partition())?;
    let loss = quantile_process(beta, data, config.tau)?;
    let p = beta.num_groups();
    let mut acc = CompensatedSum::default();
    acc.add(loss);
    for j in 1..=p {
        acc.add(config.mu1 * weights.w1(j) * beta.group_norm(j));
    }
    for j in 2..=p {
        acc.add(config.mu2 * weights.w2(j) * beta.pair_difference_norm(j));
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::GroupPartition;
    use ndarray::{array, Array1, Array2};
    use proptest::prelude::*;

    fn single_column_design(y: Vec<f64>) -> GroupedDesign {
        let n = y.len();
        let x = Array2::from_elem((n, 1), 1.0);
        GroupedDesign::new(Array1::from(y), x, vec![1]).unwrap()
    }

    #[test]
    fn check_loss_matches_definition() {
        assert_eq!(check_loss(0.0, 0.5).unwrap(), 0.0);
        assert!((check_loss(2.0, 0.3).unwrap() - 0.6).abs() < 1e-15);
        assert!((check_loss(-2.0, 0.25).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn check_loss_rejects_bad_inputs() {
        assert!(check_loss(1.0, 0.0).is_err());
        assert!(check_loss(1.0, 1.0).is_err());
        assert!(check_loss(f64::INFINITY, 0.5).is_err());
        assert!(check_loss(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn quantile_process_zero_iff_interpolating() {
        let data = single_column_design(vec![2.0, 2.0, 2.0]);
        let beta =
            GroupedCoefficients::new(array![2.0], data.partition().clone()).unwrap();
        assert_eq!(quantile_process(&beta, &data, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn quantile_process_single_term() {
        let data = single_column_design(vec![1.0]);
        let beta =
            GroupedCoefficients::new(array![0.0], data.partition().clone()).unwrap();
        assert!((quantile_process(&beta, &data, 0.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quantile_process_two_terms_hand_sum() {
        // Residuals (1, -1) at tau = 0.25: 0.25·1 + 0.75·1.
        let y = array![1.0, -1.0];
        let x = array![[1.0, 0.0], [0.0, 1.0]];
        let data = GroupedDesign::new(y, x, vec![1, 1]).unwrap();
        let beta =
            GroupedCoefficients::new(array![0.0, 0.0], data.partition().clone()).unwrap();
        let expected = check_loss(1.0, 0.25).unwrap() + check_loss(-1.0, 0.25).unwrap();
        assert!((quantile_process(&beta, &data, 0.25).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quantile_process_rejects_partition_mismatch() {
        let data = single_column_design(vec![1.0, 2.0]);
        let other = GroupPartition::new(vec![2]).unwrap();
        let beta = GroupedCoefficients::new(array![0.0, 0.0], other).unwrap();
        assert!(quantile_process(&beta, &data, 0.5).is_err());
    }

    fn hand_weights(partition: &GroupPartition, w1: Vec<f64>, w2: Vec<f64>) -> AdaptiveWeights {
        AdaptiveWeights::from_raw(partition.clone(), w1, w2, 1.0).unwrap()
    }

    #[test]
    fn penalized_objective_hand_value() {
        // p = 2, d = 1, zero loss part: X = (1, 1), y = 1·1 + 1·3 = 4.
        let y = array![4.0];
        let x = array![[1.0, 1.0]];
        let data = GroupedDesign::new(y, x, vec![1, 1]).unwrap();
        let beta =
            GroupedCoefficients::new(array![1.0, 3.0], data.partition().clone()).unwrap();
        let weights = hand_weights(data.partition(), vec![1.0, 1.0], vec![0.5]);
        let config = FitConfig::new(0.5, 2.0, 4.0, 1.0).unwrap();
        let q = penalized_objective(&beta, &data, &weights, &config).unwrap();
        // 2·(1 + 3) + 4·0.5·2 = 12, loss part exactly 0.
        assert!((q - 12.0).abs() < 1e-12);
    }

    #[test]
    fn penalized_objective_reduces_to_loss() {
        let data = single_column_design(vec![1.0, 3.0, -2.0]);
        let beta =
            GroupedCoefficients::new(array![0.7], data.partition().clone()).unwrap();
        let weights = hand_weights(data.partition(), vec![3.0], vec![]);
        let config = FitConfig::new(0.25, 0.0, 0.0, 1.0).unwrap();
        let q = penalized_objective(&beta, &data, &weights, &config).unwrap();
        let g = quantile_process(&beta, &data, 0.25).unwrap();
        assert_eq!(q, g);
    }

    #[test]
    fn penalized_objective_zero_beta_drops_penalties() {
        let data = single_column_design(vec![1.0, 3.0]);
        let beta = GroupedCoefficients::zeros(data.partition().clone());
        let weights = hand_weights(data.partition(), vec![10.0], vec![]);
        let config = FitConfig::new(0.5, 5.0, 7.0, 1.0).unwrap();
        let q = penalized_objective(&beta, &data, &weights, &config).unwrap();
        let g = quantile_process(&beta, &data, 0.5).unwrap();
        assert_eq!(q, g);
    }

    proptest! {
        // ρ_τ(u) = ρ_{1−τ}(−u)
        #[test]
        fn reflection_identity(u in -50.0f64..50.0, tau in 0.01f64..0.99) {
            let a = check_loss(u, tau).unwrap();
            let b = check_loss(-u, 1.0 - tau).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn check_loss_nonnegative(u in -1e6f64..1e6, tau in 0.01f64..0.99) {
            let v = check_loss(u, tau).unwrap();
            prop_assert!(v >= 0.0);
            prop_assert_eq!(v == 0.0, u == 0.0);
        }

        // Convexity of Q along random segments, and monotonicity in mu.
        #[test]
        fn objective_convex_and_monotone(
            y in proptest::collection::vec(-5.0f64..5.0, 6),
            xs in proptest::collection::vec(-2.0f64..2.0, 6 * 4),
            b1 in proptest::collection::vec(-3.0f64..3.0, 4),
            b2 in proptest::collection::vec(-3.0f64..3.0, 4),
            lambda in 0.0f64..1.0,
            tau in 0.1f64..0.9,
            mu1 in 0.0f64..4.0,
            mu2 in 0.0f64..4.0,
        ) {
            let x = Array2::from_shape_vec((6, 4), xs).unwrap();
            let data = GroupedDesign::new(Array1::from(y), x, vec![2, 2]).unwrap();
            let weights = hand_weights(data.partition(), vec![1.0, 2.0], vec![0.5]);
            let mut config = FitConfig::new(tau, mu1, mu2, 1.0).unwrap();

            let part = data.partition().clone();
            let beta1 = GroupedCoefficients::new(Array1::from(b1), part.clone()).unwrap();
            let beta2 = GroupedCoefficients::new(Array1::from(b2), part.clone()).unwrap();
            let mix_values = &beta1.values() * lambda + &beta2.values() * (1.0 - lambda);
            let mix = GroupedCoefficients::new(mix_values, part).unwrap();

            let q1 = penalized_objective(&beta1, &data, &weights, &config).unwrap();
            let q2 = penalized_objective(&beta2, &data, &weights, &config).unwrap();
            let qm = penalized_objective(&mix, &data, &weights, &config).unwrap();
            prop_assert!(qm <= lambda * q1 + (1.0 - lambda) * q2 + 1e-12);

            let q_base = penalized_objective(&beta1, &data, &weights, &config).unwrap();
            config.mu1 += 0.7;
            let q_more_mu1 = penalized_objective(&beta1, &data, &weights, &config).unwrap();
            config.mu2 += 1.3;
            let q_more_mu2 = penalized_objective(&beta1, &data, &weights, &config).unwrap();
            prop_assert!(q_more_mu1 >= q_base - 1e-12);
            prop_assert!(q_more_mu2 >= q_more_mu1 - 1e-12);
        }
    }
}
