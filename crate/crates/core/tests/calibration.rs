use amyloid_core::svm::{platt_calibrate, platt_nll, PlattParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Central differences of the NLL, independent of the solver's analytic gradient.
fn numeric_gradient(f: &[f64], y: &[f64], p: PlattParams<f64>) -> (f64, f64) {
    let h = 1e-6;
    let at = |a: f64, b: f64| platt_nll(f, y, &PlattParams { a, b }).unwrap();
    let ga = (at(p.a + h, p.b) - at(p.a - h, p.b)) / (2.0 * h);
    let gb = (at(p.a, p.b + h) - at(p.a, p.b - h)) / (2.0 * h);
    (ga, gb)
}

#[test]
fn gradient_vanishes_at_the_fit() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..50 {
        let n = rng.random_range(10..200);
        let shift = rng.random_range(0.0..2.0);
        let mut y: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        y[0] = 1.0;
        y[1] = -1.0;
        let f: Vec<f64> = y.iter().map(|&l| l * shift + rng.random_range(-2.0..2.0)).collect();
        let p = platt_calibrate(&f, &y, 100).unwrap();
        let (ga, gb) = numeric_gradient(&f, &y, p);
        assert!(ga.hypot(gb) < 1e-6, "trial {trial}: |grad| = {}", ga.hypot(gb));
    }
}

#[test]
fn fit_beats_nearby_parameters() {
    let f = [-1.5, -0.7, -0.2, 0.1, 0.4, 0.9, 1.3, -0.4, 0.6, 2.0];
    let y = [-1.0, -1.0, 1.0, -1.0, 1.0, 1.0, 1.0, -1.0, -1.0, 1.0];
    let p = platt_calibrate(&f, &y, 100).unwrap();
    let best = platt_nll(&f, &y, &p).unwrap();
    for (da, db) in [(0.01, 0.0), (-0.01, 0.0), (0.0, 0.01), (0.0, -0.01), (0.01, -0.01)] {
        let q = PlattParams { a: p.a + da, b: p.b + db };
        assert!(platt_nll(&f, &y, &q).unwrap() > best);
    }
    assert!(p.a < 0.0);
}
