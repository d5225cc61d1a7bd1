// Temporary probe reproducing oracle instance 33 to see signed gaps.
use fgql::design::{FitConfig, GroupedDesign, SolverControls};
use fgql::weights::{compute_weights, DEFAULT_WEIGHT_CAP};
use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

fn main() {
    for i in [33u64, 7, 12] {
        let mut rng = ChaCha12Rng::seed_from_u64(7000 + i);
        let p = rng.gen_range(1..=3usize);
        let sizes: Vec<usize> = (0..p).map(|_| rng.gen_range(1..=2usize)).collect();
        let r: usize = sizes.iter().sum();
        let n = rng.gen_range((r + 4).max(10)..=30usize);
        let x = Array2::from_shape_fn((n, r), |_| rng.gen_range(-1.5..1.5));
        let truth: Vec<f64> = (0..r)
            .map(|_| if rng.gen_bool(0.5) { rng.gen_range(-2.0..2.0) } else { 0.0 })
            .collect();
        let mut y = x.dot(&Array1::from(truth));
        for yi in y.iter_mut() { *yi += rng.gen_range(-0.5..0.5); }
        let data = GroupedDesign::new(y, x, sizes).unwrap();
        let tau = *[0.25, 0.5, 0.75].choose(&mut rng).unwrap();
        let exponent = rng.gen_range(0.05..0.45);
        let kappa = rng.gen_range(0.25..4.0);
        let mu = kappa * (n as f64).powf(exponent);
        let controls = SolverControls {
            abs_tol: 1e-10, rel_tol: 1e-9, max_iterations: 400_000,
            ..SolverControls::default()
        };
        let pilot = fgql::pilot_fit(&data, tau, controls).unwrap();
        let weights = compute_weights(&pilot, 1.0, DEFAULT_WEIGHT_CAP).unwrap();
        let config = FitConfig { tau, mu1: mu, mu2: mu * rng.gen_range(0.5..2.0), gamma: 1.0, solver: controls };
        let result = fgql::fit(&data, &weights, &config).unwrap();
        eprintln!(
            "instance {i}: n={n} r={r} tau={tau} mu1={:.3} mu2={:.3} converged={} iters={} obj={:.12}",
            config.mu1, config.mu2, result.converged, result.iterations, result.objective_value
        );
    }
}
