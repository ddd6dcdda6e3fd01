//! Brute-force reference solver for the soft-margin SVM dual.
//!
//! Accelerated projected gradient (FISTA with gradient restarts) on
//! `min 1/2 a'Qa - 1'a` over `{0 <= a <= C, y'a = 0}`, `Q = yy' * K`. The
//! projection onto the box-and-hyperplane set is computed by bisection on the
//! hyperplane multiplier. Shares nothing with the SMO implementation.

#![allow(dead_code)]

pub struct OracleSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
    pub iterations: usize,
    pub step_residual: f64,
}

/// Euclidean projection of `v` onto `{0 <= a <= c, y'a = 0}`.
pub fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |nu: f64| -> Vec<f64> { v.iter().zip(y).map(|(&vi, &yi)| (vi - nu * yi).clamp(0.0, c)).collect() };
    let balance = |a: &[f64]| -> f64 { a.iter().zip(y).map(|(ai, yi)| ai * yi).sum() };
    // balance(nu) is non-increasing in nu.
    let span = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-span, span);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if balance(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * span {
            break;
        }
    }
    at(0.5 * (lo + hi))
}

/// Frobenius norm: an upper bound on the largest eigenvalue, so `1 / L` is a safe step.
fn lipschitz_bound(q: &[Vec<f64>]) -> f64 {
    q.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(1e-12)
}

pub fn dual_value(alpha: &[f64], y: &[f64], gram: &[Vec<f64>]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * gram[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Kernel expansion `sum_j a_j y_j K_ij` at every training row.
pub fn expansion(alpha: &[f64], y: &[f64], gram: &[Vec<f64>]) -> Vec<f64> {
    gram.iter().map(|row| row.iter().zip(alpha).zip(y).map(|((k, a), yj)| k * a * yj).sum()).collect()
}

/// Midpoint of the minimizers of the hinge loss `sum_i max(0, 1 - y_i (g_i + b))` over `b`.
pub fn optimal_bias(g: &[f64], y: &[f64]) -> f64 {
    let hinge = |b: f64| -> f64 { g.iter().zip(y).map(|(gi, yi)| (1.0 - yi * (gi + b)).max(0.0)).sum() };
    let breaks: Vec<f64> = g.iter().zip(y).map(|(gi, yi)| yi - gi).collect();
    let values: Vec<f64> = breaks.iter().map(|&b| hinge(b)).collect();
    let best = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * (1.0 + best.abs());
    let at_min: Vec<f64> = breaks.iter().zip(&values).filter(|(_, &v)| v <= best + tol).map(|(&b, _)| b).collect();
    let lo = at_min.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = at_min.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    0.5 * (lo + hi)
}

/// Runs until the projected-gradient fixed-point gap `|a - P(a - step grad)|_inf` drops below `tol`.
pub fn solve_dual(gram: &[Vec<f64>], y: &[f64], c: f64, tol: f64, max_iter: usize) -> OracleSolution {
    let n = y.len();
    let q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * gram[i][j]).collect()).collect();
    let step = 1.0 / lipschitz_bound(&q);
    let grad = |a: &[f64]| -> Vec<f64> {
        q.iter().map(|row| row.iter().zip(a).map(|(qij, aj)| qij * aj).sum::<f64>() - 1.0).collect()
    };

    let fixed_point_gap = |a: &[f64]| -> f64 {
        let g = grad(a);
        let trial: Vec<f64> = a.iter().zip(&g).map(|(ai, gi)| ai - step * gi).collect();
        project(&trial, y, c).iter().zip(a).map(|(p, ai)| (p - ai).abs()).fold(0.0, f64::max)
    };

    let mut x = project(&vec![0.0; n], y, c);
    let mut z = x.clone();
    let mut t = 1.0f64;
    let mut residual = fixed_point_gap(&x);
    let mut iterations = 0;
    while iterations < max_iter && residual >= tol {
        iterations += 1;
        let g = grad(&z);
        let trial: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi - step * gi).collect();
        let next = project(&trial, y, c);
        // Restart momentum when it points uphill.
        let uphill: f64 = g.iter().zip(next.iter().zip(&x)).map(|(gi, (a, b))| gi * (a - b)).sum();
        let (t_next, beta) = if uphill > 0.0 {
            (1.0, 0.0)
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            (t_next, (t - 1.0) / t_next)
        };
        z = next.iter().zip(&x).map(|(a, b)| a + beta * (a - b)).collect();
        x = next;
        t = t_next;
        residual = fixed_point_gap(&x);
    }
    let g = expansion(&x, y, gram);
    let bias = optimal_bias(&g, y);
    let objective = dual_value(&x, y, gram);
    OracleSolution { alpha: x, bias, objective, iterations, step_residual: residual }
}
