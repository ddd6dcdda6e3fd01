mod common;

use amyloid_core::svm::{cubic_kernel, dual_objective, gram_matrix, smo_solve, KernelParams, SmoParams};
use common::qp_oracle::{dual_value, solve_dual};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

struct Problem {
    rows: Vec<Vec<f64>>,
    y: Vec<f64>,
    probes: Vec<Vec<f64>>,
    c: f64,
    kernel: KernelParams<f64>,
}

fn problem(seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=12);
    let d = rng.random_range(1..=4);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..d).map(|_| rng.sample(StandardNormal)).collect() };
    let rows: Vec<Vec<f64>> = (0..n).map(|_| draw(&mut rng)).collect();
    let probes: Vec<Vec<f64>> = (0..5).map(|_| draw(&mut rng)).collect();
    let mut y: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
    y[0] = 1.0;
    y[n - 1] = -1.0;
    let c = [0.1, 1.0, 10.0][rng.random_range(0..3)];
    Problem { rows, y, probes, c, kernel: KernelParams::auto(d) }
}

fn expand(alpha: &[f64], y: &[f64], rows: &[Vec<f64>], bias: f64, x: &[f64], k: &KernelParams<f64>) -> f64 {
    rows.iter()
        .zip(alpha)
        .zip(y)
        .fold(bias, |acc, ((r, a), yi)| acc + a * yi * cubic_kernel(r, x, k).unwrap())
}

#[test]
fn smo_matches_projected_gradient_oracle() {
    let mut worst = 0.0f64;
    for seed in 0..120 {
        let p = problem(seed);
        let gram = gram_matrix(&p.rows, &p.kernel);
        let mut params = SmoParams::new(p.c, 1e-9, seed);
        params.max_passes = Some(1000 * p.y.len());
        let smo = smo_solve(&gram, &p.y, &params, None).unwrap();
        let oracle = solve_dual(&gram, &p.y, p.c, 1e-10, 2_000_000);
        assert!(oracle.step_residual < 1e-10, "seed {seed}: oracle stalled at {}", oracle.step_residual);

        let rel = 1e-9 * (1.0 + oracle.objective.abs());
        assert!(smo.objective >= oracle.objective - 1e-7 - rel, "seed {seed}: {} < {}", smo.objective, oracle.objective);
        for x in p.rows.iter().chain(&p.probes) {
            let a = expand(&smo.alpha, &p.y, &p.rows, smo.bias, x, &p.kernel);
            let b = expand(&oracle.alpha, &p.y, &p.rows, oracle.bias, x, &p.kernel);
            worst = worst.max((a - b).abs());
            assert!((a - b).abs() < 1e-4, "seed {seed} (n={}, C={}): smo {a} vs oracle {b}", p.y.len(), p.c);
        }
    }
    eprintln!("largest decision-value gap: {worst:.3e}");
}

#[test]
fn dual_objective_never_decreases() {
    for seed in 500..560 {
        let p = problem(seed);
        let gram = gram_matrix(&p.rows, &p.kernel);
        let mut steps = 0;
        let mut last = 0.0;
        let mut check = |u: &amyloid_core::svm::SmoUpdate<f64>| {
            let slack = 1e-12 * (1.0 + u.objective_before.abs());
            assert!(u.objective_after >= u.objective_before - slack, "seed {seed}: {} -> {}", u.objective_before, u.objective_after);
            assert!(u.objective_before >= last - slack);
            assert!(u.alpha_y_sum.abs() < 1e-9);
            last = u.objective_after;
            steps += 1;
        };
        // Nearly singular Gram matrices from 1-D data can need more than the default 10n passes.
        let params = SmoParams { max_passes: Some(1000 * p.y.len()), ..SmoParams::new(p.c, 1e-3, seed) };
        let sol = smo_solve(&gram, &p.y, &params, Some(&mut check)).unwrap();
        assert!(steps > 0);
        let recomputed = dual_objective(&sol.alpha, &p.y, &gram);
        assert!((recomputed - dual_value(&sol.alpha, &p.y, &gram)).abs() < 1e-10);
        assert!((recomputed - sol.objective).abs() < 1e-9 * (1.0 + recomputed.abs()));
    }
}
