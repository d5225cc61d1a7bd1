//! Monte Carlo studies of the estimator's limit behaviour.
//!
//! Each study sweeps sample sizes, runs independent replications of the
//! full pilot → weights → penalized-fit pipeline on freshly generated data,
//! and aggregates:
//!
//! * selection: how often the recovered active set equals the truth, and
//!   how often the designated fused pairs come out exactly equal;
//! * rate: the median of `‖β̂ − β⁰‖ / √(p/n)` per sample size, whose
//!   stability across `n` is the scaling diagnostic;
//! * normality: the empirical variance of `√n·uᵗ(β̂ − β⁰)_A` against the
//!   studentized covariance target, with nominal-95% interval coverage.
//!
//! Replications are independent tasks with deterministic per-replication
//! seeds; aggregation sorts before reducing, so reports are invariant under
//! any permutation of replication order and under the degree of
//! parallelism.

use ndarray::Array1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{FitConfig, SolverControls};
use crate::error::{Error, Result};
use crate::schedule::TuningSchedule;
use crate::sim::scenario::{asymptotic_covariance, ResolvedScenario, SimulationScenario};
use crate::solver::{fit, pilot_fit, select_active_groups};
use crate::weights::{compute_weights, DEFAULT_WEIGHT_CAP};

/// Two-sided 97.5% standard normal quantile, for nominal-95% intervals.
const Z_975: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Selection,
    Normality,
    Rate,
}

/// Sample sizes and replication count of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySweep {
    pub n_values: Vec<usize>,
    pub replications: usize,
}

impl Default for StudySweep {
    fn default() -> Self {
        Self {
            n_values: vec![200, 400, 800],
            replications: 200,
        }
    }
}

/// Direction `u` for the normality study, resolved against the active set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StudyDirection {
    /// Unit vector on the `k`th stacked active coordinate (1-based).
    ActiveCoordinate { index: usize },
    /// Equal weight on coordinate `coordinate` of two active groups.
    ///
    /// When the two groups share one true value, fluctuations along this
    /// direction are insensitive to whether the estimator fused them, so
    /// the unrestricted covariance target stays exact.
    FusedPairCoordinate {
        first_group: usize,
        second_group: usize,
        coordinate: usize,
    },
    /// Explicit unit vector of length `r⁰`.
    Custom { u: Vec<f64> },
}

impl StudyDirection {
    pub(crate) fn resolve(&self, scenario: &ResolvedScenario) -> Result<Array1<f64>> {
        let active = &scenario.active_groups;
        let partition = scenario.partition();
        let mut offsets = std::collections::BTreeMap::new();
        let mut total = 0usize;
        for &j in active {
            offsets.insert(j, total);
            total += partition.range(j).len();
        }
        let mut u = Array1::<f64>::zeros(total);
        match self {
            StudyDirection::ActiveCoordinate { index } => {
                if *index == 0 || *index > total {
                    return Err(Error::InvalidParameter(format!(
                        "active coordinate {index} out of range 1..={total}"
                    )));
                }
                u[*index - 1] = 1.0;
            }
            StudyDirection::FusedPairCoordinate {
                first_group,
                second_group,
                coordinate,
            } => {
                let k = coordinate
                    .checked_sub(1)
                    .ok_or_else(|| Error::InvalidParameter("coordinate is 1-based".into()))?;
                for group in [first_group, second_group] {
                    let offset = offsets.get(group).ok_or_else(|| {
                        Error::InvalidParameter(format!("group {group} is not active"))
                    })?;
                    if k >= partition.range(*group).len() {
                        return Err(Error::InvalidParameter(format!(
                            "coordinate {coordinate} exceeds the size of group {group}"
                        )));
                    }
                    u[offset + k] = std::f64::consts::FRAC_1_SQRT_2;
                }
            }
            StudyDirection::Custom { u: raw } => {
                if raw.len() != total {
                    return Err(Error::DimensionMismatch(format!(
                        "direction has {} entries but the active stack has {total}",
                        raw.len()
                    )));
                }
                let norm: f64 = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-8 {
                    return Err(Error::InvalidParameter(format!(
                        "direction must be a unit vector, got norm {norm}"
                    )));
                }
                for (dst, src) in u.iter_mut().zip(raw.iter()) {
                    *dst = *src;
                }
            }
        }
        Ok(u)
    }
}

/// Normality aggregates for one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityStats {
    /// Sample variance of `√n·uᵗ(β̂ − β⁰)_A` across replications.
    pub empirical_variance: f64,
    /// Mean of the per-replication studentized targets `uᵗΣ̂u`.
    pub theoretical_variance: f64,
    pub variance_ratio: f64,
    /// Fraction of replications inside the nominal 95% interval.
    pub ci_coverage: f64,
}

/// Aggregates for one sample size of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerSampleSizeReport {
    pub n: usize,
    pub p: usize,
    pub r: usize,
    /// Fraction of replications recovering exactly the true active set.
    pub selection_rate: f64,
    /// Fraction with every designated fused pair exactly equal; absent when
    /// the truth designates no fused pair.
    pub fusion_rate: Option<f64>,
    pub median_error: f64,
    /// `median_error / √(p/n)`.
    pub error_rate_ratio: f64,
    pub normality: Option<NormalityStats>,
    /// Replications contributing to the aggregates.
    pub replications: usize,
    pub fit_failures: usize,
    pub non_converged: usize,
    pub first_failure: Option<String>,
}

/// Full study output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub study: StudyKind,
    pub per_n: Vec<PerSampleSizeReport>,
    /// Rate studies: `error_rate_ratio` at the largest `n` over the
    /// smallest; bounded ratios are the scaling evidence.
    pub boundedness_diagnostic: Option<f64>,
    pub master_seed: u64,
    pub replications_requested: usize,
    pub schedule: TuningSchedule,
}

struct RepOutcome {
    selection_exact: bool,
    fusion_exact: Option<bool>,
    error_norm: f64,
    normality_value: Option<f64>,
    normality_target: Option<f64>,
    converged: bool,
}

/// Selection-consistency study: exact active-set and fused-pair recovery.
pub fn run_selection_study(
    scenario: &SimulationScenario,
    schedule: &TuningSchedule,
    sweep: &StudySweep,
    controls: SolverControls,
) -> Result<StudyReport> {
    run_study(scenario, schedule, sweep, controls, StudyKind::Selection, None)
}

/// Asymptotic-normality study along a fixed direction of the active stack.
pub fn run_normality_study(
    scenario: &SimulationScenario,
    schedule: &TuningSchedule,
    sweep: &StudySweep,
    controls: SolverControls,
    direction: &StudyDirection,
) -> Result<StudyReport> {
    run_study(
        scenario,
        schedule,
        sweep,
        controls,
        StudyKind::Normality,
        Some(direction),
    )
}

/// Error-scaling study for growth-law scenarios.
pub fn run_rate_study(
    scenario: &SimulationScenario,
    schedule: &TuningSchedule,
    sweep: &StudySweep,
    controls: SolverControls,
) -> Result<StudyReport> {
    run_study(scenario, schedule, sweep, controls, StudyKind::Rate, None)
}

fn run_study(
    scenario: &SimulationScenario,
    schedule: &TuningSchedule,
    sweep: &StudySweep,
    controls: SolverControls,
    kind: StudyKind,
    direction: Option<&StudyDirection>,
) -> Result<StudyReport> {
    if sweep.replications == 0 {
        return Err(Error::InvalidParameter(
            "study needs at least one replication".into(),
        ));
    }
    if sweep.n_values.is_empty() {
        return Err(Error::InvalidParameter(
            "study needs at least one sample size".into(),
        ));
    }
    let mut per_n = Vec::with_capacity(sweep.n_values.len());
    for &n in &sweep.n_values {
        let resolved = scenario.resolve(n)?;
        let u = direction.map(|d| d.resolve(&resolved)).transpose()?;
        let (mu1, mu2) = schedule.mu_at(n);
        let config = FitConfig {
            tau: scenario.tau,
            mu1,
            mu2,
            gamma: schedule.gamma,
            solver: controls,
        };

        let outcomes: Vec<Result<RepOutcome>> = (0..sweep.replications as u64)
            .into_par_iter()
            .map(|rep| run_replication(&resolved, &config, u.as_ref(), rep))
            .collect();

        per_n.push(aggregate(n, &resolved, outcomes)?);
    }
    let boundedness_diagnostic = if per_n.len() >= 2 {
        let first = per_n.first().unwrap().error_rate_ratio;
        let last = per_n.last().unwrap().error_rate_ratio;
        Some(last / first)
    } else {
        None
    };
    Ok(StudyReport {
        study: kind,
        per_n,
        boundedness_diagnostic,
        master_seed: scenario.seed,
        replications_requested: sweep.replications,
        schedule: *schedule,
    })
}

fn run_replication(
    resolved: &ResolvedScenario,
    config: &FitConfig,
    u: Option<&Array1<f64>>,
    replication: u64,
) -> Result<RepOutcome> {
    let data = resolved.generate(replication);
    let pilot = pilot_fit(&data, config.tau, config.solver)?;
    let weights = compute_weights(&pilot, config.gamma, DEFAULT_WEIGHT_CAP)?;
    let result = fit(&data, &weights, config)?;

    let selection_exact = select_active_groups(&result) == resolved.active_groups;
    let fusion_exact = if resolved.fused_pairs.is_empty() {
        None
    } else {
        Some(
            resolved
                .fused_pairs
                .iter()
                .all(|j| result.fused_pairs.contains(j)),
        )
    };
    let error_norm = (&result.coefficients.values() - &resolved.true_beta.values())
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();

    let (normality_value, normality_target) = match u {
        None => (None, None),
        Some(u) => {
            let deviation = active_stack_deviation(resolved, &result);
            let value = (resolved.n as f64).sqrt() * u.dot(&deviation);
            let sigma = asymptotic_covariance(
                &data,
                &resolved.active_groups,
                resolved.tau,
                resolved.error.density_at_zero(),
            )?;
            let target = u.dot(&sigma.dot(u));
            (Some(value), Some(target))
        }
    };

    Ok(RepOutcome {
        selection_exact,
        fusion_exact,
        error_norm,
        normality_value,
        normality_target,
        converged: result.converged,
    })
}

/// Stacked `(β̂ − β⁰)` over the true active groups, ascending group order.
fn active_stack_deviation(
    resolved: &ResolvedScenario,
    result: &crate::solver::FitResult,
) -> Array1<f64> {
    let mut out = Vec::new();
    for &j in &resolved.active_groups {
        let est = result.coefficients.group(j);
        let truth = resolved.true_beta.group(j);
        for (a, b) in est.iter().zip(truth.iter()) {
            out.push(a - b);
        }
    }
    Array1::from(out)
}

fn aggregate(
    n: usize,
    resolved: &ResolvedScenario,
    outcomes: Vec<Result<RepOutcome>>,
) -> Result<PerSampleSizeReport> {
    let mut ok = Vec::new();
    let mut fit_failures = 0usize;
    let mut first_failure = None;
    for outcome in outcomes {
        match outcome {
            Ok(o) => ok.push(o),
            Err(e) => {
                fit_failures += 1;
                if first_failure.is_none() {
                    first_failure = Some(e.to_string());
                }
            }
        }
    }
    if ok.is_empty() {
        return Err(Error::InfeasibleScenario(format!(
            "every replication failed at n = {n}: {}",
            first_failure.unwrap_or_default()
        )));
    }
    let count = ok.len();
    let selection_rate =
        ok.iter().filter(|o| o.selection_exact).count() as f64 / count as f64;
    let fusion_rate = if resolved.fused_pairs.is_empty() {
        None
    } else {
        Some(
            ok.iter()
                .filter(|o| o.fusion_exact == Some(true))
                .count() as f64
                / count as f64,
        )
    };
    let mut errors: Vec<f64> = ok.iter().map(|o| o.error_norm).collect();
    errors.sort_by(f64::total_cmp);
    let median_error = median_of_sorted(&errors);
    let p = resolved.num_groups();
    let error_rate_ratio = median_error / ((p as f64) / (n as f64)).sqrt();

    let normality = if ok.iter().all(|o| o.normality_value.is_some()) {
        let mut values: Vec<f64> = ok.iter().map(|o| o.normality_value.unwrap()).collect();
        let mut targets: Vec<f64> = ok.iter().map(|o| o.normality_target.unwrap()).collect();
        let covered = ok
            .iter()
            .filter(|o| {
                let v = o.normality_value.unwrap();
                let t = o.normality_target.unwrap();
                v.abs() <= Z_975 * t.sqrt()
            })
            .count();
        values.sort_by(f64::total_cmp);
        targets.sort_by(f64::total_cmp);
        let empirical_variance = sample_variance(&values);
        let theoretical_variance = targets.iter().sum::<f64>() / targets.len() as f64;
        Some(NormalityStats {
            empirical_variance,
            theoretical_variance,
            variance_ratio: empirical_variance / theoretical_variance,
            ci_coverage: covered as f64 / count as f64,
        })
    } else {
        None
    };

    Ok(PerSampleSizeReport {
        n,
        p,
        r: resolved.partition().total_len(),
        selection_rate,
        fusion_rate,
        median_error,
        error_rate_ratio,
        normality,
        replications: count,
        fit_failures,
        non_converged: ok.iter().filter(|o| !o.converged).count(),
        first_failure,
    })
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Sample variance of pre-sorted values (sorting makes the reduction
/// independent of replication order).
fn sample_variance(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n < 2 {
        return 0.0;
    }
    let mean = sorted.iter().sum::<f64>() / n as f64;
    sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
}
