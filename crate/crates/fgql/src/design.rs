//! Data model: grouped designs, grouped coefficient vectors, fit settings.
//!
//! Groups are contiguous, ordered blocks of design columns; group `1` owns
//! the first `d₁` columns and so on. The ordering matters: the fused penalty
//! couples each group with its predecessor. Group ids are 1-based everywhere
//! in the public API, matching the ids used in group-spec files.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, s};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Contiguous ordered partition of coefficient indices into groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPartition {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl GroupPartition {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidParameter(
                "partition needs at least one group".into(),
            ));
        }
        if sizes.iter().any(|&d| d == 0) {
            return Err(Error::InvalidParameter(
                "every group size must be at least 1".into(),
            ));
        }
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        for &d in &sizes {
            offsets.push(acc);
            acc += d;
        }
        Ok(Self { sizes, offsets })
    }

    /// Number of groups `p`.
    pub fn num_groups(&self) -> usize {
        self.sizes.len()
    }

    /// Total coefficient count `r = Σ dⱼ`.
    pub fn total_len(&self) -> usize {
        self.offsets.last().unwrap() + self.sizes.last().unwrap()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Half-open coefficient index range of 1-based group `j`.
    pub fn range(&self, j: usize) -> std::ops::Range<usize> {
        let i = j - 1;
        self.offsets[i]..self.offsets[i] + self.sizes[i]
    }
}

/// Observed responses and grouped design matrix.
///
/// Row `i` of `x` is the observation vector `xᵢᵗ`; its columns are split
/// into `p` contiguous groups by the partition.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedDesign {
    y: Array1<f64>,
    x: Array2<f64>,
    partition: GroupPartition,
}

impl GroupedDesign {
    pub fn new(y: Array1<f64>, x: Array2<f64>, group_sizes: Vec<usize>) -> Result<Self> {
        let partition = GroupPartition::new(group_sizes)?;
        if y.len() != x.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "response has {} entries but design has {} rows",
                y.len(),
                x.nrows()
            )));
        }
        if y.is_empty() {
            return Err(Error::InvalidParameter(
                "design needs at least one observation".into(),
            ));
        }
        if partition.total_len() != x.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "group sizes sum to {} but design has {} columns",
                partition.total_len(),
                x.ncols()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "design and response must be finite".into(),
            ));
        }
        Ok(Self { y, x, partition })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn num_groups(&self) -> usize {
        self.partition.num_groups()
    }

    pub fn num_coefficients(&self) -> usize {
        self.partition.total_len()
    }

    pub fn y(&self) -> ArrayView1<'_, f64> {
        self.y.view()
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn partition(&self) -> &GroupPartition {
        &self.partition
    }

    /// Columns of 1-based group `j`.
    pub fn group_columns(&self, j: usize) -> ArrayView2<'_, f64> {
        let r = self.partition.range(j);
        self.x.slice(s![.., r.start..r.end])
    }
}

/// Coefficient vector carrying the partition of the design it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedCoefficients {
    values: Array1<f64>,
    partition: GroupPartition,
}

impl GroupedCoefficients {
    pub fn new(values: Array1<f64>, partition: GroupPartition) -> Result<Self> {
        if values.len() != partition.total_len() {
            return Err(Error::DimensionMismatch(format!(
                "coefficient vector has {} entries but partition covers {}",
                values.len(),
                partition.total_len()
            )));
        }
        Ok(Self { values, partition })
    }

    pub fn zeros(partition: GroupPartition) -> Self {
        let values = Array1::zeros(partition.total_len());
        Self { values, partition }
    }

    pub fn from_design(values: Array1<f64>, design: &GroupedDesign) -> Result<Self> {
        Self::new(values, design.partition().clone())
    }

    pub fn values(&self) -> ArrayView1<'_, f64> {
        self.values.view()
    }

    pub fn values_mut(&mut self) -> &mut Array1<f64> {
        &mut self.values
    }

    pub fn partition(&self) -> &GroupPartition {
        &self.partition
    }

    pub fn num_groups(&self) -> usize {
        self.partition.num_groups()
    }

    /// Subvector of 1-based group `j`.
    pub fn group(&self, j: usize) -> ArrayView1<'_, f64> {
        let r = self.partition.range(j);
        self.values.slice(s![r.start..r.end])
    }

    /// Euclidean norm `‖βⱼ‖` of 1-based group `j`.
    pub fn group_norm(&self, j: usize) -> f64 {
        self.group(j).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Euclidean norm `‖βⱼ − βⱼ₋₁‖` for `j = 2..=p`.
    ///
    /// Groups of unequal size are compared as if the shorter were padded
    /// with trailing zeros, so the norm is always well defined.
    pub fn pair_difference_norm(&self, j: usize) -> f64 {
        debug_assert!(j >= 2);
        let a = self.group(j);
        let b = self.group(j - 1);
        let mut acc = 0.0;
        for k in 0..a.len().max(b.len()) {
            let av = a.get(k).copied().unwrap_or(0.0);
            let bv = b.get(k).copied().unwrap_or(0.0);
            let d = av - bv;
            acc += d * d;
        }
        acc.sqrt()
    }

    /// True when the partitions of `self` and `other` are identical.
    pub fn same_partition(&self, other: &GroupPartition) -> bool {
        &self.partition == other
    }
}

/// Controls for the operator-splitting solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverControls {
    /// Initial splitting penalty ρ for the consensus terms.
    pub penalty_parameter: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iterations: usize,
    /// Relative cutoff below which a group norm is snapped to exact zero.
    pub zero_threshold: f64,
}

impl Default for SolverControls {
    fn default() -> Self {
        Self {
            penalty_parameter: 1.0,
            abs_tol: 1e-7,
            rel_tol: 1e-5,
            max_iterations: 10_000,
            zero_threshold: 1e-6,
        }
    }
}

impl SolverControls {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("penalty_parameter", self.penalty_parameter),
            ("abs_tol", self.abs_tol),
            ("rel_tol", self.rel_tol),
            ("zero_threshold", self.zero_threshold),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        if self.abs_tol > 1.0 || self.rel_tol > 1.0 {
            return Err(Error::InvalidParameter(
                "tolerances must not exceed 1".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Quantile level, tuning parameters, and solver controls for one fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub tau: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub gamma: f64,
    pub solver: SolverControls,
}

impl FitConfig {
    pub fn new(tau: f64, mu1: f64, mu2: f64, gamma: f64) -> Result<Self> {
        let config = Self {
            tau,
            mu1,
            mu2,
            gamma,
            solver: SolverControls::default(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        check_tau(self.tau)?;
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gamma must be strictly positive, got {}",
                self.gamma
            )));
        }
        for (name, v) in [("mu1", self.mu1), ("mu2", self.mu2)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        self.solver.validate()
    }
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile level tau must lie strictly inside (0, 1), got {tau}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn partition_rejects_empty_and_zero_groups() {
        assert!(GroupPartition::new(vec![]).is_err());
        assert!(GroupPartition::new(vec![2, 0]).is_err());
    }

    #[test]
    fn partition_ranges_are_contiguous() {
        let p = GroupPartition::new(vec![2, 1, 3]).unwrap();
        assert_eq!(p.total_len(), 6);
        assert_eq!(p.range(1), 0..2);
        assert_eq!(p.range(2), 2..3);
        assert_eq!(p.range(3), 3..6);
    }

    #[test]
    fn design_validates_shapes() {
        let y = array![1.0, 2.0];
        let x = array![[1.0, 0.0], [0.0, 1.0]];
        assert!(GroupedDesign::new(y.clone(), x.clone(), vec![1, 1]).is_ok());
        assert!(GroupedDesign::new(y.clone(), x.clone(), vec![1]).is_err());
        assert!(GroupedDesign::new(array![1.0], x, vec![1, 1]).is_err());
    }

    #[test]
    fn design_rejects_non_finite() {
        let y = array![1.0, f64::NAN];
        let x = array![[1.0, 0.0], [0.0, 1.0]];
        assert!(GroupedDesign::new(y, x, vec![1, 1]).is_err());
    }

    #[test]
    fn heterogeneous_pair_difference_pads_with_zeros() {
        let p = GroupPartition::new(vec![1, 3]).unwrap();
        let beta = GroupedCoefficients::new(array![2.0, 2.0, 3.0, 4.0], p).unwrap();
        // (2,0,0) vs (2,3,4): difference (0,3,4) has norm 5.
        assert_eq!(beta.pair_difference_norm(2), 5.0);
    }

    #[test]
    fn config_bounds() {
        assert!(FitConfig::new(0.5, 0.0, 0.0, 1.0).is_ok());
        assert!(FitConfig::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(FitConfig::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(FitConfig::new(0.5, -1.0, 0.0, 1.0).is_err());
        assert!(FitConfig::new(0.5, 0.0, 0.0, 0.0).is_err());
    }
}
