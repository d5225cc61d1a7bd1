//! Acceptance suite: one test per release criterion, each printing its
//! measured numbers. Run with
//! `cargo test -p fgql-cli --test acceptance -- --nocapture`.
//!
//! The statistical criteria are Monte Carlo checks of the estimator's
//! limit behaviour at desk scale; the numeric criteria certify the solver
//! and proximal operators against independent oracles implemented directly
//! in this file (grid searches and a projected subgradient method), never
//! through the solver's own code path.

use std::sync::OnceLock;

use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use fgql::design::{FitConfig, GroupPartition, GroupedCoefficients, GroupedDesign, SolverControls};
use fgql::loss::penalized_objective;
use fgql::prox::{block_soft_threshold, prox_check};
use fgql::schedule::{default_schedule, validate_schedule, Regime, TuningSchedule};
use fgql::sim::{
    run_normality_study, run_rate_study, run_selection_study, DesignCovariance, ErrorFamily,
    GroupLayout, SimulationScenario, StudyDirection, StudyReport, StudySweep,
};
use fgql::weights::{compute_weights, AdaptiveWeights, DEFAULT_WEIGHT_CAP};
use fgql::{fit, pilot_fit, select_active_groups};

// ---------------------------------------------------------------------
// Criterion 1: proximal operators match grid-search oracles.
// ---------------------------------------------------------------------

fn check_prox_objective(x: f64, a: f64, step: f64, tau: f64) -> f64 {
    let loss = if x < 0.0 { x * (tau - 1.0) } else { x * tau };
    step * loss + 0.5 * (x - a) * (x - a)
}

/// 1-D brute-force minimizer over `[a − 3·step, a + 3·step]` plus the kink.
fn grid_oracle_check_prox(a: f64, step: f64, tau: f64) -> f64 {
    let lo = a - 3.0 * step;
    let hi = a + 3.0 * step;
    let grid = 1e-4;
    let mut best_x = 0.0;
    let mut best = check_prox_objective(0.0, a, step, tau);
    let steps = ((hi - lo) / grid) as usize;
    for k in 0..=steps {
        let x = lo + grid * k as f64;
        let v = check_prox_objective(x, a, step, tau);
        if v < best {
            best = v;
            best_x = x;
        }
    }
    best_x
}

fn bst_objective(x: &[f64], v: &[f64], threshold: f64) -> f64 {
    let norm = x.iter().map(|u| u * u).sum::<f64>().sqrt();
    let dist: f64 = x
        .iter()
        .zip(v.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    threshold * norm + 0.5 * dist
}

#[test]
fn criterion_1_prox_certification() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(101);

    for case in 0..1000 {
        let a = rng.gen_range(-5.0..5.0);
        let step = rng.gen_range(0.05..3.0);
        let tau = rng.gen_range(0.05..0.95);
        let got = prox_check(a, step, tau).unwrap();
        let oracle = grid_oracle_check_prox(a, step, tau);
        assert!(
            (got - oracle).abs() <= 1e-3,
            "case {case}: prox_check({a}, {step}, {tau}) = {got}, grid oracle {oracle}"
        );
        let f_got = check_prox_objective(got, a, step, tau);
        let f_oracle = check_prox_objective(oracle, a, step, tau);
        assert!(
            (f_got - f_oracle).abs() <= 1e-6,
            "case {case}: objective gap {}",
            (f_got - f_oracle).abs()
        );
    }

    for case in 0..1000 {
        let dim = rng.gen_range(1..=5);
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let threshold = rng.gen_range(0.0..5.0);
        let got = block_soft_threshold(&v, threshold).unwrap();
        let f_got = bst_objective(&got, &v, threshold);

        // Random-perturbation minimality certificate in the full space.
        for scale in [1e-1, 1e-2, 1e-3] {
            for _ in 0..40 {
                let probe: Vec<f64> = got
                    .iter()
                    .map(|x| x + rng.gen_range(-scale..scale))
                    .collect();
                let f_probe = bst_objective(&probe, &v, threshold);
                assert!(
                    f_got <= f_probe + 1e-12,
                    "case {case}: perturbation beat the closed form by {}",
                    f_got - f_probe
                );
            }
        }

        // Grid search along the input ray (minimality off the ray is covered
        // by the certificate above).
        let v_norm = v.iter().map(|u| u * u).sum::<f64>().sqrt();
        let mut best_t = 0.0;
        let mut best = bst_objective(&vec![0.0; dim], &v, threshold);
        if v_norm > 0.0 {
            let grid = 1e-4 * v_norm.max(1.0);
            let steps = (v_norm / grid) as usize;
            for k in 0..=steps {
                let t = (k as f64 * grid).min(v_norm);
                let x: Vec<f64> = v.iter().map(|u| u * (t / v_norm)).collect();
                let f = bst_objective(&x, &v, threshold);
                if f < best {
                    best = f;
                    best_t = t;
                }
            }
        }
        let oracle: Vec<f64> = if v_norm > 0.0 {
            v.iter().map(|u| u * (best_t / v_norm)).collect()
        } else {
            vec![0.0; dim]
        };
        let arg_gap: f64 = got
            .iter()
            .zip(oracle.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(arg_gap <= 1e-3, "case {case}: argument gap {arg_gap}");
        assert!(
            (f_got - best).abs() <= 1e-6,
            "case {case}: objective gap {}",
            (f_got - best).abs()
        );
    }

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "prox certification took {elapsed:?}, budget 10 s"
    );
    println!(
        "[PASS] criterion 1: 1000+1000 prox cases within 1e-3/1e-6 of grid oracles in {:.2?}",
        elapsed
    );
}

// ---------------------------------------------------------------------
// Criterion 2: solver matches a projected subgradient oracle.
// ---------------------------------------------------------------------

struct TinyInstance {
    data: GroupedDesign,
    weights: AdaptiveWeights,
    config: FitConfig,
}

fn random_tiny_instance(seed: u64) -> TinyInstance {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let p = rng.gen_range(1..=3);
    let sizes: Vec<usize> = (0..p).map(|_| rng.gen_range(1..=2)).collect();
    let r: usize = sizes.iter().sum();
    let n = rng.gen_range((r + 4).max(10)..=30);
    let x = Array2::from_shape_fn((n, r), |_| rng.gen_range(-1.5..1.5));
    let truth: Vec<f64> = (0..r)
        .map(|_| {
            if rng.gen_bool(0.5) {
                rng.gen_range(-2.0..2.0)
            } else {
                0.0
            }
        })
        .collect();
    let mut y = x.dot(&Array1::from(truth));
    for yi in y.iter_mut() {
        *yi += rng.gen_range(-0.5..0.5);
    }
    let data = GroupedDesign::new(y, x, sizes).unwrap();

    let tau = *[0.25, 0.5, 0.75].choose(&mut rng).unwrap();
    // Random admissible power-law tuning at this sample size.
    let exponent = rng.gen_range(0.05..0.45);
    let kappa = rng.gen_range(0.25..4.0);
    let mu = kappa * (n as f64).powf(exponent);

    let controls = SolverControls {
        abs_tol: 1e-10,
        rel_tol: 1e-9,
        max_iterations: 400_000,
        ..SolverControls::default()
    };
    let pilot = pilot_fit(&data, tau, controls).unwrap();
    let weights = compute_weights(&pilot, 1.0, DEFAULT_WEIGHT_CAP).unwrap();
    let config = FitConfig {
        tau,
        mu1: mu,
        mu2: mu * rng.gen_range(0.5..2.0),
        gamma: 1.0,
        solver: controls,
    };
    TinyInstance {
        data,
        weights,
        config,
    }
}

/// Objective evaluator local to the oracle (plain sums; the instances are
/// tiny enough for full precision).
fn oracle_objective(beta: &[f64], inst: &TinyInstance) -> f64 {
    let data = &inst.data;
    let (tau, mu1, mu2) = (inst.config.tau, inst.config.mu1, inst.config.mu2);
    let x = data.x();
    let mut total = 0.0;
    for i in 0..data.n() {
        let mut pred = 0.0;
        for k in 0..beta.len() {
            pred += x[[i, k]] * beta[k];
        }
        let u = data.y()[i] - pred;
        total += if u < 0.0 { u * (tau - 1.0) } else { u * tau };
    }
    let partition = data.partition();
    let p = partition.num_groups();
    for j in 1..=p {
        let range = partition.range(j);
        let norm: f64 = beta[range].iter().map(|v| v * v).sum::<f64>().sqrt();
        total += mu1 * inst.weights.w1(j) * norm;
    }
    for j in 2..=p {
        let cur = partition.range(j);
        let prev = partition.range(j - 1);
        let len = cur.len().max(prev.len());
        let mut acc = 0.0;
        for k in 0..len {
            let a = cur.clone().nth(k).map(|i| beta[i]).unwrap_or(0.0);
            let b = prev.clone().nth(k).map(|i| beta[i]).unwrap_or(0.0);
            acc += (a - b) * (a - b);
        }
        total += mu2 * inst.weights.w2(j) * acc.sqrt();
    }
    total
}

fn oracle_subgradient(beta: &[f64], inst: &TinyInstance, out: &mut [f64]) {
    let data = &inst.data;
    let (tau, mu1, mu2) = (inst.config.tau, inst.config.mu1, inst.config.mu2);
    let x = data.x();
    out.fill(0.0);
    for i in 0..data.n() {
        let mut pred = 0.0;
        for k in 0..beta.len() {
            pred += x[[i, k]] * beta[k];
        }
        let u = data.y()[i] - pred;
        let psi = if u > 0.0 {
            tau
        } else if u < 0.0 {
            tau - 1.0
        } else {
            0.0
        };
        for k in 0..beta.len() {
            out[k] -= x[[i, k]] * psi;
        }
    }
    let partition = data.partition();
    let p = partition.num_groups();
    for j in 1..=p {
        let range = partition.range(j);
        let norm: f64 = beta[range.clone()].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for i in range {
                out[i] += mu1 * inst.weights.w1(j) * beta[i] / norm;
            }
        }
    }
    for j in 2..=p {
        let cur = partition.range(j);
        let prev = partition.range(j - 1);
        let len = cur.len().max(prev.len());
        let mut diff = vec![0.0; len];
        for (k, d) in diff.iter_mut().enumerate() {
            let a = cur.clone().nth(k).map(|i| beta[i]).unwrap_or(0.0);
            let b = prev.clone().nth(k).map(|i| beta[i]).unwrap_or(0.0);
            *d = a - b;
        }
        let norm: f64 = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            let scale = mu2 * inst.weights.w2(j) / norm;
            for (k, d) in diff.iter().enumerate() {
                if let Some(i) = cur.clone().nth(k) {
                    out[i] += scale * d;
                }
                if let Some(i) = prev.clone().nth(k) {
                    out[i] -= scale * d;
                }
            }
        }
    }
}

/// Projected subgradient descent with diminishing steps and restarts,
/// followed by convex line-search polishing along random directions.
fn subgradient_oracle(inst: &TinyInstance, seed: u64) -> (Vec<f64>, f64) {
    let r = inst.data.num_coefficients();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut best_beta = vec![0.0; r];
    let mut best_obj = oracle_objective(&best_beta, inst);

    const ITERATIONS: usize = 2_000_000;
    const RESTARTS: usize = 5;
    let mut grad = vec![0.0; r];
    for restart in 0..RESTARTS {
        let mut beta: Vec<f64> = if restart == 0 {
            vec![0.0; r]
        } else {
            (0..r).map(|_| rng.gen_range(-2.0..2.0)).collect()
        };
        oracle_subgradient(&beta, inst, &mut grad);
        let g0 = grad.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        let s0 = 2.0 / g0;
        for k in 1..=ITERATIONS {
            oracle_subgradient(&beta, inst, &mut grad);
            let step = s0 / (k as f64).sqrt();
            for i in 0..r {
                beta[i] -= step * grad[i];
            }
            if k % 64 == 0 || k == ITERATIONS {
                let obj = oracle_objective(&beta, inst);
                if obj < best_obj {
                    best_obj = obj;
                    best_beta.copy_from_slice(&beta);
                }
            }
        }
    }

    // Ternary-search polish along random unit directions; each 1-D slice
    // of a convex objective is unimodal.
    let mut beta = best_beta.clone();
    for round in 0..2000 {
        let dir: Vec<f64> = if round % 4 < 2 {
            let mut d = vec![0.0; r];
            d[round % r] = 1.0;
            d
        } else {
            let d: Vec<f64> = (0..r).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-9);
            d.into_iter().map(|v| v / norm).collect()
        };
        let eval = |t: f64, scratch: &mut Vec<f64>| {
            scratch.clear();
            scratch.extend(beta.iter().zip(dir.iter()).map(|(b, d)| b + t * d));
            oracle_objective(scratch, inst)
        };
        let mut scratch = Vec::with_capacity(r);
        let (mut lo, mut hi) = (-0.25f64, 0.25f64);
        for _ in 0..70 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if eval(m1, &mut scratch) <= eval(m2, &mut scratch) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let t = 0.5 * (lo + hi);
        let obj = eval(t, &mut scratch);
        if obj < best_obj {
            best_obj = obj;
            beta.copy_from_slice(&scratch);
        }
    }
    (beta, best_obj)
}

#[test]
fn criterion_2_solver_oracle_equivalence() {
    use rayon::prelude::*;
    let start = std::time::Instant::now();
    let gaps: Vec<f64> = (0..50u64)
        .into_par_iter()
        .map(|i| {
            let inst = random_tiny_instance(7000 + i);
            let result = fit(&inst.data, &inst.weights, &inst.config).unwrap();
            let (_, oracle_obj) = subgradient_oracle(&inst, 9000 + i);
            // Evaluate both candidates through the library objective.
            let solver_obj = penalized_objective(
                &result.coefficients,
                &inst.data,
                &inst.weights,
                &inst.config,
            )
            .unwrap();
            (solver_obj - oracle_obj).abs() / oracle_obj.max(1.0)
        })
        .collect();

    let worst = gaps.iter().cloned().fold(0.0f64, f64::max);
    for (i, gap) in gaps.iter().enumerate() {
        assert!(*gap <= 1e-5, "instance {i}: relative objective gap {gap}");
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "solver-oracle certification took {elapsed:?}, budget 2 min"
    );
    println!(
        "[PASS] criterion 2: 50 instances, worst relative objective gap {worst:.2e} (<= 1e-5) in {:.2?}",
        elapsed
    );
}

// ---------------------------------------------------------------------
// Criterion 3: pilot optimality via quantile subgradient counts.
// ---------------------------------------------------------------------

#[test]
fn criterion_3_pilot_subgradient_counts() {
    let mut rng = ChaCha12Rng::seed_from_u64(333);
    for case in 0..20 {
        let p = rng.gen_range(1..=4);
        let sizes: Vec<usize> = (0..p).map(|_| rng.gen_range(1..=2)).collect();
        let r: usize = sizes.iter().sum();
        let n = rng.gen_range(40..=80);
        // The counting condition is the subgradient optimality statement in
        // the constant direction, so the designs carry a constant column.
        let mut x = Array2::from_shape_fn((n, r), |_| rng.gen_range(-2.0..2.0));
        for i in 0..n {
            x[[i, 0]] = 1.0;
        }
        let truth = Array1::from_shape_fn(r, |_| rng.gen_range(-1.0..1.0));
        let mut y = x.dot(&truth);
        for yi in y.iter_mut() {
            *yi += rng.gen_range(-1.0..1.0);
        }
        let data = GroupedDesign::new(y, x, sizes).unwrap();
        let tau = *[0.25, 0.5, 0.75].choose(&mut rng).unwrap();
        let controls = SolverControls {
            abs_tol: 1e-9,
            rel_tol: 1e-8,
            max_iterations: 200_000,
            ..SolverControls::default()
        };
        let result = pilot_fit(&data, tau, controls).unwrap();
        let predictions = data.x().dot(&result.coefficients.values());
        let negatives = data
            .y()
            .iter()
            .zip(predictions.iter())
            .filter(|(y, p)| *y - *p < 0.0)
            .count() as f64;
        let nonpositives = data
            .y()
            .iter()
            .zip(predictions.iter())
            .filter(|(y, p)| *y - *p <= 0.0)
            .count() as f64;
        let target = tau * data.n() as f64;
        let slack = r as f64;
        assert!(
            negatives <= target + slack,
            "case {case}: {negatives} negative residuals exceed tau*n + r = {}",
            target + slack
        );
        assert!(
            nonpositives >= target - slack,
            "case {case}: {nonpositives} nonpositive residuals below tau*n - r = {}",
            target - slack
        );
    }
    println!("[PASS] criterion 3: subgradient count condition held on all 20 pilot fits");
}

// ---------------------------------------------------------------------
// Criteria 4-6: the reference Monte Carlo scenario.
// ---------------------------------------------------------------------

fn reference_scenario() -> SimulationScenario {
    SimulationScenario {
        layout: GroupLayout::Fixed {
            group_sizes: vec![3; 6],
            true_beta: vec![
                1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                0.0, 0.0, 0.0,
            ],
        },
        design: DesignCovariance::Identity,
        error: ErrorFamily::Normal { sd: 1.0 },
        tau: 0.5,
        seed: 20260810,
        alpha: 0.0,
    }
}

fn reference_schedule() -> TuningSchedule {
    let (schedule, _) = default_schedule(800, 1.0, Regime::FixedP, 0.0, 0.0).unwrap();
    schedule
}

fn selection_report() -> &'static StudyReport {
    static REPORT: OnceLock<StudyReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        run_selection_study(
            &reference_scenario(),
            &reference_schedule(),
            &StudySweep::default(),
            SolverControls::default(),
        )
        .unwrap()
    })
}

#[test]
fn criterion_4_selection_consistency() {
    let start = std::time::Instant::now();
    let report = selection_report();
    let by_n: std::collections::BTreeMap<usize, f64> = report
        .per_n
        .iter()
        .map(|p| (p.n, p.selection_rate))
        .collect();
    let rate_200 = by_n[&200];
    let rate_800 = by_n[&800];
    assert!(
        rate_800 >= 0.90,
        "selection rate at n=800 is {rate_800}, need >= 0.90"
    );
    assert!(
        rate_800 >= rate_200 - 0.05,
        "selection rate dropped from {rate_200} at n=200 to {rate_800} at n=800"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "study took {elapsed:?}");
    println!(
        "[PASS] criterion 4: selection rates {:?} (n=800 rate {rate_800} >= 0.90) in {:.2?}",
        report
            .per_n
            .iter()
            .map(|p| (p.n, p.selection_rate))
            .collect::<Vec<_>>(),
        elapsed
    );
}

#[test]
fn criterion_5_fusion_recovery() {
    let report = selection_report();
    let rates: Vec<(usize, f64)> = report
        .per_n
        .iter()
        .map(|p| (p.n, p.fusion_rate.expect("scenario designates a fused pair")))
        .collect();
    let rate_800 = rates.iter().find(|(n, _)| *n == 800).unwrap().1;
    assert!(
        rate_800 >= 0.80,
        "fusion rate at n=800 is {rate_800}, need >= 0.80"
    );
    for window in rates.windows(2) {
        let (n_prev, r_prev) = window[0];
        let (n_next, r_next) = window[1];
        assert!(
            r_next >= r_prev - 0.05,
            "fusion rate fell from {r_prev} (n={n_prev}) to {r_next} (n={n_next})"
        );
    }
    println!("[PASS] criterion 5: fusion rates {rates:?} (n=800 rate {rate_800} >= 0.80)");
}

#[test]
fn criterion_6_asymptotic_normality() {
    let start = std::time::Instant::now();
    // Direction with equal weight on the shared coordinate of the two
    // equal active groups: its limit variance is the plain Theorem target
    // whether or not the estimator fuses the pair.
    let direction = StudyDirection::FusedPairCoordinate {
        first_group: 1,
        second_group: 2,
        coordinate: 1,
    };
    let report = run_normality_study(
        &reference_scenario(),
        &reference_schedule(),
        &StudySweep {
            n_values: vec![800],
            replications: 200,
        },
        SolverControls::default(),
        &direction,
    )
    .unwrap();
    let stats = report.per_n[0].normality.as_ref().unwrap();
    let target = std::f64::consts::FRAC_PI_2;
    assert!(
        (stats.empirical_variance - target).abs() <= 0.25 * target,
        "empirical variance {} outside ±25% of {target}",
        stats.empirical_variance
    );
    assert!(
        (0.90..=0.99).contains(&stats.ci_coverage),
        "coverage {} outside [0.90, 0.99]",
        stats.ci_coverage
    );
    println!(
        "[PASS] criterion 6: variance {:.4} (target {:.4} ±25%), coverage {:.3} in {:.2?}",
        stats.empirical_variance,
        target,
        stats.ci_coverage,
        start.elapsed()
    );
}

// ---------------------------------------------------------------------
// Criterion 7: growing-p error scaling.
// ---------------------------------------------------------------------

#[test]
fn criterion_7_growing_p_rate() {
    let start = std::time::Instant::now();
    let scenario = SimulationScenario {
        layout: GroupLayout::Growing {
            c: 0.4,
            d: 1,
            active_values: vec![1.5, 1.5],
        },
        design: DesignCovariance::Identity,
        error: ErrorFamily::Normal { sd: 1.0 },
        tau: 0.5,
        seed: 20260811,
        alpha: 0.2,
    };
    let (schedule, _) = default_schedule(400, 1.0, Regime::GrowingP, 0.4, 0.2).unwrap();
    let report = run_rate_study(
        &scenario,
        &schedule,
        &StudySweep {
            n_values: vec![400, 1600],
            replications: 100,
        },
        SolverControls::default(),
    )
    .unwrap();
    let ratios: Vec<(usize, f64)> = report
        .per_n
        .iter()
        .map(|p| (p.n, p.error_rate_ratio))
        .collect();
    let diagnostic = report.boundedness_diagnostic.unwrap();
    assert!(
        diagnostic <= 2.0,
        "scaled error grew by factor {diagnostic} from n=400 to n=1600, need <= 2"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 900.0, "rate study took {elapsed:?}");
    println!(
        "[PASS] criterion 7: scaled errors {ratios:?}, growth factor {diagnostic:.3} <= 2 in {:.2?}",
        elapsed
    );
}

// ---------------------------------------------------------------------
// Criterion 8: schedule admissibility table.
// ---------------------------------------------------------------------

#[test]
fn criterion_8_schedule_validation_table() {
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

    // (schedule, expected admissibility, expected per-condition verdicts),
    // conclusions frozen from the exponent inequalities worked by hand.
    let table: Vec<(TuningSchedule, bool, Vec<bool>)> = vec![
        (fixed(0.25, 1.0), true, vec![true, true, true]),
        (fixed(0.5, 1.0), false, vec![true, false, true]),
        (fixed(0.0, 1.0), false, vec![false, true, false]),
        (fixed(0.25, 0.2), false, vec![true, true, false]),
        (fixed(0.45, 0.2), true, vec![true, true, true]),
        (fixed(0.3, 2.0), true, vec![true, true, true]),
        (growing(0.25, 1.0, 0.0, 0.0), true, vec![true, true, true]),
        (growing(0.39, 1.0, 0.4, 0.1), false, vec![true, true, false]),
        (growing(0.45, 1.0, 0.4, 0.2), true, vec![true, true, true]),
        (growing(0.55, 1.0, 0.4, 0.2), false, vec![true, false, true]),
        (growing(0.3, 2.0, 0.8, 0.5), false, vec![true, true, false]),
        (growing(0.9, 2.0, 0.8, 0.5), true, vec![true, true, true]),
    ];

    for (idx, (schedule, expect_admissible, expect_verdicts)) in table.iter().enumerate() {
        let records = validate_schedule(schedule);
        let verdicts: Vec<bool> = records.iter().map(|r| r.satisfied).collect();
        assert_eq!(
            &verdicts, expect_verdicts,
            "row {idx}: per-condition verdicts differ: {records:#?}"
        );
        assert_eq!(
            schedule.is_admissible(),
            *expect_admissible,
            "row {idx}: admissibility differs"
        );
    }

    // The c = alpha = 0 reduction: the growing-regime conditions coincide
    // with the last two fixed-regime conditions for every exponent.
    for e in [-0.2, 0.0, 0.1, 0.25, 0.49, 0.5, 0.7] {
        for gamma in [0.2, 1.0, 2.0] {
            let g = validate_schedule(&growing(e, gamma, 0.0, 0.0));
            let f = validate_schedule(&fixed(e, gamma));
            assert_eq!(g[1].satisfied, f[1].satisfied, "decay condition at e={e}");
            assert_eq!(
                g[2].satisfied, f[2].satisfied,
                "divergence condition at e={e}"
            );
        }
    }
    println!("[PASS] criterion 8: 12-row admissibility table and the c=alpha=0 reduction match");
}

// ---------------------------------------------------------------------
// Criterion 9: bit-reproducible simulate -> fit pipeline.
// ---------------------------------------------------------------------

#[test]
fn criterion_9_pipeline_determinism() {
    let bin = env!("CARGO_BIN_EXE_fgql");
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("scenario.cfg");
    std::fs::write(
        &config_path,
        "layout=fixed\n\
         group_sizes=2,2\n\
         beta=1,1,0,0\n\
         error=normal\n\
         error_sd=1\n\
         tau=0.5\n\
         seed=424242\n\
         n=120\n",
    )
    .unwrap();

    // Identical paths on both runs, so the embedded manifests agree and the
    // comparison is pure bit-reproducibility.
    let run_pipeline = || -> (Vec<u8>, Vec<u8>, Vec<u8>, Vec<u8>) {
        let csv = dir.path().join("data.csv");
        let fit_out = dir.path().join("fit.json");
        let status = std::process::Command::new(bin)
            .args(["simulate", "--config"])
            .arg(&config_path)
            .arg("--out")
            .arg(&csv)
            .status()
            .unwrap();
        assert!(status.success());
        let status = std::process::Command::new(bin)
            .args(["fit", "--data"])
            .arg(&csv)
            .arg("--groups-file")
            .arg(dir.path().join("data.csv.groups"))
            .args(["--tau", "0.5", "--gamma", "1", "--schedule", "fixed", "--out"])
            .arg(&fit_out)
            .status()
            .unwrap();
        assert!(status.success(), "fit exited with {status:?}");
        (
            std::fs::read(&csv).unwrap(),
            std::fs::read(dir.path().join("data.csv.truth.json")).unwrap(),
            std::fs::read(dir.path().join("data.csv.groups")).unwrap(),
            std::fs::read(&fit_out).unwrap(),
        )
    };

    let first = run_pipeline();
    let second = run_pipeline();
    assert_eq!(first.0, second.0, "simulated CSV bytes differ");
    assert_eq!(first.1, second.1, "truth sidecar bytes differ");
    assert_eq!(first.2, second.2, "group sidecar bytes differ");
    assert_eq!(first.3, second.3, "fit JSON bytes differ");

    // Lossless numeric round trip: re-emitting the parsed CSV reproduces
    // the original bytes.
    let table = fgql::io::parse_csv_bytes(&first.0).unwrap();
    let re_emitted = fgql::io::write_csv(&table.header, table.rows.iter().cloned());
    assert_eq!(re_emitted.as_bytes(), &first.0[..], "CSV round trip not lossless");

    println!("[PASS] criterion 9: simulate -> fit pipeline bit-identical across runs");
}
