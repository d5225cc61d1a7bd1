//! Scenario definitions: true coefficients, design law, error law, and the
//! constants needed to audit the model assumptions on generated data.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::design::{GroupPartition, GroupedCoefficients, GroupedDesign};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, Cholesky};
use crate::sim::error_dist::{ErrorDistribution, ErrorFamily};

/// Covariance of one design row; rows are drawn i.i.d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "design", rename_all = "snake_case")]
pub enum DesignCovariance {
    /// Independent standard normal features.
    Identity,
    /// AR(1) correlation `rho^|i−j|` between features.
    Ar1 { rho: f64 },
}

/// Group structure of the truth: fixed, or growing with the sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "snake_case")]
pub enum GroupLayout {
    /// Explicit group sizes and true coefficient vector.
    Fixed {
        group_sizes: Vec<usize>,
        true_beta: Vec<f64>,
    },
    /// `p = ⌊n^c⌋` groups of common size `d`; the leading groups take the
    /// prototype coefficients (length a multiple of `d`), the rest are zero.
    Growing {
        c: f64,
        d: usize,
        active_values: Vec<f64>,
    },
}

/// A complete data-generating process plus its audit constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationScenario {
    pub layout: GroupLayout,
    pub design: DesignCovariance,
    pub error: ErrorFamily,
    pub tau: f64,
    pub seed: u64,
    /// Signal-floor exponent used by the assumption audit.
    pub alpha: f64,
}

/// Scenario resolved at a concrete sample size.
pub struct ResolvedScenario {
    pub n: usize,
    pub true_beta: GroupedCoefficients,
    /// 1-based ids of groups with nonzero true norm.
    pub active_groups: Vec<usize>,
    /// Pairs `j` with `β⁰ⱼ = β⁰ⱼ₋₁ ≠ 0`: the fusion pattern the estimator
    /// is expected to recover.
    pub fused_pairs: Vec<usize>,
    /// Smallest nonzero true group norm.
    pub h0: f64,
    pub tau: f64,
    pub error: ErrorDistribution,
    design: DesignCovariance,
    design_chol: Option<Array2<f64>>,
    seed: u64,
}

impl SimulationScenario {
    /// Resolves the group structure and truth at sample size `n`.
    ///
    /// Fails when the scenario is infeasible at this `n`, in particular
    /// when `r ≥ n`.
    pub fn resolve(&self, n: usize) -> Result<ResolvedScenario> {
        let (sizes, beta) = match &self.layout {
            GroupLayout::Fixed {
                group_sizes,
                true_beta,
            } => (group_sizes.clone(), true_beta.clone()),
            GroupLayout::Growing { c, d, active_values } => {
                if !(0.0..1.0).contains(c) {
                    return Err(Error::InfeasibleScenario(format!(
                        "growth exponent c must lie in [0, 1), got {c}"
                    )));
                }
                if *d == 0 {
                    return Err(Error::InfeasibleScenario(
                        "group size d must be at least 1".into(),
                    ));
                }
                if active_values.len() % d != 0 {
                    return Err(Error::InfeasibleScenario(format!(
                        "active prototype length {} is not a multiple of d = {d}",
                        active_values.len()
                    )));
                }
                let p = (n as f64).powf(*c).floor() as usize;
                let p0 = active_values.len() / d;
                if p < p0 + 1 {
                    return Err(Error::InfeasibleScenario(format!(
                        "growth law gives p = {p} groups at n = {n}, but the active \
                         prototype occupies {p0}"
                    )));
                }
                let mut beta = active_values.clone();
                beta.resize(p * d, 0.0);
                (vec![*d; p], beta)
            }
        };
        let partition = GroupPartition::new(sizes)?;
        let r = partition.total_len();
        if r >= n {
            return Err(Error::InfeasibleScenario(format!(
                "r = {r} coefficients with only n = {n} observations"
            )));
        }
        let true_beta = GroupedCoefficients::new(Array1::from(beta), partition)?;
        let p = true_beta.num_groups();
        let active_groups: Vec<usize> = (1..=p)
            .filter(|&j| true_beta.group_norm(j) > 0.0)
            .collect();
        let fused_pairs: Vec<usize> = (2..=p)
            .filter(|&j| {
                true_beta.pair_difference_norm(j) == 0.0 && true_beta.group_norm(j) > 0.0
            })
            .collect();
        let h0 = active_groups
            .iter()
            .map(|&j| true_beta.group_norm(j))
            .fold(f64::INFINITY, f64::min);
        let design_chol = match self.design {
            DesignCovariance::Identity => None,
            DesignCovariance::Ar1 { rho } => {
                if !(-1.0..1.0).contains(&rho) {
                    return Err(Error::InfeasibleScenario(format!(
                        "AR(1) correlation must lie in (-1, 1), got {rho}"
                    )));
                }
                let mut cov = Array2::<f64>::zeros((r, r));
                for i in 0..r {
                    for j in 0..r {
                        cov[[i, j]] = rho.powi((i as i32 - j as i32).abs());
                    }
                }
                Some(cholesky_factor(&cov)?)
            }
        };
        Ok(ResolvedScenario {
            n,
            true_beta,
            active_groups,
            fused_pairs,
            h0,
            tau: self.tau,
            error: ErrorDistribution::new(self.error, self.tau)?,
            design: self.design,
            design_chol,
            seed: self.seed,
        })
    }
}

fn cholesky_factor(cov: &Array2<f64>) -> Result<Array2<f64>> {
    Ok(Cholesky::new(cov.view())?.factor().to_owned())
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-replication stream seed.
pub(crate) fn replication_seed(master: u64, n: usize, replication: u64) -> u64 {
    let with_n = splitmix64(master ^ splitmix64(n as u64));
    splitmix64(with_n ^ splitmix64(replication))
}

impl ResolvedScenario {
    pub fn num_groups(&self) -> usize {
        self.true_beta.num_groups()
    }

    pub fn partition(&self) -> &GroupPartition {
        self.true_beta.partition()
    }

    /// Generates one dataset; deterministic in `(seed, n, replication)`.
    pub fn generate(&self, replication: u64) -> GroupedDesign {
        let mut rng =
            ChaCha12Rng::seed_from_u64(replication_seed(self.seed, self.n, replication));
        let n = self.n;
        let r = self.true_beta.partition().total_len();
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut x = Array2::<f64>::zeros((n, r));
        let mut z = vec![0.0; r];
        for i in 0..n {
            for zk in z.iter_mut() {
                *zk = standard_normal(&normal, &mut rng);
            }
            match (&self.design, &self.design_chol) {
                (DesignCovariance::Identity, _) => {
                    for k in 0..r {
                        x[[i, k]] = z[k];
                    }
                }
                (DesignCovariance::Ar1 { .. }, Some(l)) => {
                    for k in 0..r {
                        let mut acc = 0.0;
                        for m in 0..=k {
                            acc += l[[k, m]] * z[m];
                        }
                        x[[i, k]] = acc;
                    }
                }
                (DesignCovariance::Ar1 { .. }, None) => unreachable!(),
            }
        }
        let mut y = x.dot(&self.true_beta.values());
        for yi in y.iter_mut() {
            *yi += self.error.sample(&mut rng);
        }
        GroupedDesign::new(y, x, self.partition().sizes().to_vec())
            .expect("resolved scenario always produces a consistent design")
    }
}

fn standard_normal<R: Rng + ?Sized>(normal: &Normal, rng: &mut R) -> f64 {
    let u = loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            break u;
        }
    };
    normal.inverse_cdf(u)
}

/// Thresholds for the pass/warn verdicts of the assumption audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditThresholds {
    /// Floor for the smallest eigenvalue of the scaled Gram matrix.
    pub lambda_min_floor: f64,
    /// Ceiling for the largest eigenvalue of the scaled Gram matrix.
    pub lambda_max_ceiling: f64,
    /// Warn when `√(p/n)·maxᵢ‖xᵢ‖` exceeds this.
    pub a3_ceiling: f64,
    /// Warn when `n^{−α}·h₀` falls below this.
    pub a5_floor: f64,
}

impl Default for AuditThresholds {
    fn default() -> Self {
        Self {
            lambda_min_floor: 0.1,
            lambda_max_ceiling: 10.0,
            a3_ceiling: 0.5,
            a5_floor: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditCheck {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Numerical audit of the eigenvalue, design-growth, and signal-floor
/// assumptions on one generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionAudit {
    pub gram_lambda_min: f64,
    pub gram_lambda_max: f64,
    /// `√(p/n)·maxᵢ‖xᵢ‖`, which must vanish asymptotically.
    pub a3_statistic: f64,
    /// `n^{−α}·h₀`, which must stay bounded away from zero.
    pub a5_statistic: f64,
    pub checks: Vec<AuditCheck>,
}

impl AssumptionAudit {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Audits the scaled Gram spectrum, the design-growth statistic, and the
/// signal floor for a dataset.
pub fn audit_assumptions(
    data: &GroupedDesign,
    alpha: f64,
    h0: f64,
    thresholds: &AuditThresholds,
) -> Result<AssumptionAudit> {
    let n = data.n() as f64;
    let p = data.num_groups() as f64;
    let x = data.x();
    let gram = x.t().dot(&x) / n;
    let eig = symmetric_eigenvalues(gram.view())?;
    let lambda_min = eig[0];
    let lambda_max = *eig.last().unwrap();
    let max_row_norm = (0..data.n())
        .map(|i| x.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max);
    let a3 = (p / n).sqrt() * max_row_norm;
    let a5 = n.powf(-alpha) * h0;
    let checks = vec![
        AuditCheck {
            name: "gram_lambda_min".into(),
            statistic: lambda_min,
            threshold: thresholds.lambda_min_floor,
            pass: lambda_min >= thresholds.lambda_min_floor,
        },
        AuditCheck {
            name: "gram_lambda_max".into(),
            statistic: lambda_max,
            threshold: thresholds.lambda_max_ceiling,
            pass: lambda_max <= thresholds.lambda_max_ceiling,
        },
        AuditCheck {
            name: "design_growth".into(),
            statistic: a3,
            threshold: thresholds.a3_ceiling,
            pass: a3 <= thresholds.a3_ceiling,
        },
        AuditCheck {
            name: "signal_floor".into(),
            statistic: a5,
            threshold: thresholds.a5_floor,
            pass: a5 >= thresholds.a5_floor,
        },
    ];
    Ok(AssumptionAudit {
        gram_lambda_min: lambda_min,
        gram_lambda_max: lambda_max,
        a3_statistic: a3,
        a5_statistic: a5,
        checks,
    })
}

/// Studentized asymptotic covariance `τ(1−τ)·f₀^{−2}·U⁻¹` of the active
/// coefficients, built from the empirical Gram of the active columns.
pub fn asymptotic_covariance(
    data: &GroupedDesign,
    active: &[usize],
    tau: f64,
    f0: f64,
) -> Result<Array2<f64>> {
    crate::design::check_tau(tau)?;
    if active.is_empty() {
        return Err(Error::InvalidParameter(
            "active set must not be empty".into(),
        ));
    }
    if !(f0 > 0.0) || !f0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "density at zero must be strictly positive and finite, got {f0}"
        )));
    }
    let partition = data.partition();
    let cols: Vec<usize> = active
        .iter()
        .flat_map(|&j| partition.range(j))
        .collect();
    let n = data.n();
    let x = data.x();
    let r0 = cols.len();
    let mut gram = Array2::<f64>::zeros((r0, r0));
    for (a, &ca) in cols.iter().enumerate() {
        for (b, &cb) in cols.iter().enumerate() {
            let mut acc = 0.0;
            for i in 0..n {
                acc += x[[i, ca]] * x[[i, cb]];
            }
            gram[[a, b]] = acc / n as f64;
        }
    }
    let chol = Cholesky::new(gram.view())?;
    let mut inv = chol.inverse();
    inv *= tau * (1.0 - tau) / (f0 * f0);
    Ok(inv)
}
