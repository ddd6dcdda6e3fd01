//! Sequential minimal optimization for the soft-margin SVM dual
//!
//! ```text
//! maximize   W(a) = sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij
//! subject to 0 <= a_i <= C,  sum_i a_i y_i = 0
//! ```
//!
//! Working pairs follow Platt's heuristic: the first index sweeps KKT
//! violators, alternating full passes with passes over the non-bound
//! multipliers; the second index maximizes |E_i - E_j| over the non-bound
//! multipliers, lowest index winning ties, with errors read from a cache
//! kept for every row. When that pair makes no progress the remaining
//! candidates are tried from a seeded random starting point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SvmError;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoParams<T> {
    pub c: T,
    /// KKT tolerance on the functional margin.
    pub tol: T,
    /// Relative threshold below which a multiplier change counts as no progress.
    pub eps: T,
    /// Cap on outer-loop sweeps; `None` means `10 * n`.
    pub max_passes: Option<usize>,
    pub seed: u64,
}

impl<T: Scalar> SmoParams<T> {
    pub fn new(c: T, tol: T, seed: u64) -> Self {
        Self { c, tol, eps: T::lit(1e-12), max_passes: None, seed }
    }
}

/// Result of the dual solve on the training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution<T> {
    pub alpha: Vec<T>,
    pub bias: T,
    pub objective: T,
    /// Largest KKT violation of the returned (alpha, bias).
    pub max_violation: T,
    pub passes: usize,
    pub updates: usize,
}

impl<T: Scalar> DualSolution<T> {
    /// Decision value at training row `i` given its kernel row.
    pub fn decision(&self, y: &[T], kernel_row: &[T]) -> T {
        self.alpha
            .iter()
            .zip(y)
            .zip(kernel_row)
            .fold(self.bias, |acc, ((&a, &yi), &k)| acc + a * yi * k)
    }
}

/// Emitted after every accepted pair update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoUpdate<T> {
    pub i: usize,
    pub j: usize,
    pub objective_before: T,
    pub objective_after: T,
    /// `sum_i a_i y_i` after the update.
    pub alpha_y_sum: T,
}

/// Dual objective `W(a)` evaluated from scratch.
pub fn dual_objective<T: Scalar>(alpha: &[T], y: &[T], gram: &[Vec<T>]) -> T {
    let mut quad = T::zero();
    for i in 0..alpha.len() {
        if alpha[i] == T::zero() {
            continue;
        }
        for j in 0..alpha.len() {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * gram[i][j];
        }
    }
    alpha.iter().copied().sum::<T>() - quad / T::lit(2.0)
}

struct Solver<'a, T> {
    gram: &'a [Vec<T>],
    y: &'a [T],
    c: T,
    tol: T,
    eps: T,
    snap: T,
    alpha: Vec<T>,
    /// grad[i] = sum_j a_j y_j K_ij; decision value is grad[i] + b.
    grad: Vec<T>,
    b: T,
    rng: ChaCha8Rng,
    updates: usize,
}

impl<T: Scalar> Solver<'_, T> {
    #[inline]
    fn error(&self, i: usize) -> T {
        self.grad[i] + self.b - self.y[i]
    }

    #[inline]
    fn is_free(&self, i: usize) -> bool {
        self.alpha[i] > T::zero() && self.alpha[i] < self.c
    }

    fn objective(&self) -> T {
        self.alpha
            .iter()
            .zip(&self.grad)
            .zip(self.y)
            .fold(T::zero(), |acc, ((&a, &g), &y)| acc + a - a * y * g / T::lit(2.0))
    }

    /// Exact change of W when (a_i, a_j) move by (di, dj).
    fn objective_delta(&self, i: usize, j: usize, di: T, dj: T) -> T {
        let k = self.gram;
        let half = T::lit(0.5);
        di * (T::one() - self.y[i] * self.grad[i]) + dj * (T::one() - self.y[j] * self.grad[j])
            - half * (di * di * k[i][i] + dj * dj * k[j][j])
            - di * dj * self.y[i] * self.y[j] * k[i][j]
    }

    fn take_step(&mut self, i1: usize, i2: usize, observer: &mut Option<&mut dyn FnMut(&SmoUpdate<T>)>) -> bool {
        if i1 == i2 {
            return false;
        }
        let (a1, a2) = (self.alpha[i1], self.alpha[i2]);
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (e1, e2) = (self.error(i1), self.error(i2));
        let s = y1 * y2;
        let c = self.c;
        let (lo, hi) = if y1 != y2 {
            ((a2 - a1).max(T::zero()), (c + a2 - a1).min(c))
        } else {
            ((a2 + a1 - c).max(T::zero()), (a2 + a1).min(c))
        };
        if !(hi > lo) {
            return false;
        }
        let k = self.gram;
        let eta = k[i1][i1] + k[i2][i2] - T::lit(2.0) * k[i1][i2];
        let mut a2_new = if eta > T::zero() {
            (a2 + y2 * (e1 - e2) / eta).max(lo).min(hi)
        } else {
            // Objective is linear (or convex) along the constraint line: pick the better end.
            let at = |a2n: T| self.objective_delta(i1, i2, -s * (a2n - a2), a2n - a2);
            let (w_lo, w_hi) = (at(lo), at(hi));
            let margin = self.eps * (T::one() + w_lo.abs().max(w_hi.abs()));
            if w_lo > w_hi + margin {
                lo
            } else if w_hi > w_lo + margin {
                hi
            } else {
                a2
            }
        };
        if a2_new < self.snap {
            a2_new = T::zero();
        } else if a2_new > c - self.snap {
            a2_new = c;
        }
        if (a2_new - a2).abs() < self.eps * (a2_new + a2 + self.eps) {
            return false;
        }
        let mut a1_new = a1 + s * (a2 - a2_new);
        if a1_new < self.snap {
            a1_new = T::zero();
        } else if a1_new > c - self.snap {
            a1_new = c;
        }
        let (d1, d2) = (a1_new - a1, a2_new - a2);
        let before = observer.as_ref().map(|_| self.objective());

        for (g, (r1, r2)) in self.grad.iter_mut().zip(k[i1].iter().zip(&k[i2])) {
            *g += d1 * y1 * *r1 + d2 * y2 * *r2;
        }
        self.alpha[i1] = a1_new;
        self.alpha[i2] = a2_new;

        let b1 = y1 - self.grad[i1];
        let b2 = y2 - self.grad[i2];
        self.b = if self.is_free(i1) {
            b1
        } else if self.is_free(i2) {
            b2
        } else {
            (b1 + b2) / T::lit(2.0)
        };
        self.updates += 1;

        if let (Some(obs), Some(before)) = (observer.as_mut(), before) {
            let alpha_y_sum = self.alpha.iter().zip(self.y).fold(T::zero(), |acc, (&a, &y)| acc + a * y);
            obs(&SmoUpdate { i: i1, j: i2, objective_before: before, objective_after: self.objective(), alpha_y_sum });
        }
        true
    }

    fn violates(&self, i: usize) -> bool {
        let r = self.error(i) * self.y[i];
        (r < -self.tol && self.alpha[i] < self.c) || (r > self.tol && self.alpha[i] > T::zero())
    }

    fn examine(&mut self, i2: usize, observer: &mut Option<&mut dyn FnMut(&SmoUpdate<T>)>) -> bool {
        if !self.violates(i2) {
            return false;
        }
        let n = self.alpha.len();
        let e2 = self.error(i2);
        let mut best: Option<(usize, T)> = None;
        for i in (0..n).filter(|&i| i != i2 && self.is_free(i)) {
            let gap = (self.error(i) - e2).abs();
            if best.is_none_or(|(_, g)| gap > g) {
                best = Some((i, gap));
            }
        }
        if let Some((i1, _)) = best {
            if self.take_step(i1, i2, observer) {
                return true;
            }
        }
        let start = self.rng.random_range(0..n);
        for off in 0..n {
            let i1 = (start + off) % n;
            if self.is_free(i1) && self.take_step(i1, i2, observer) {
                return true;
            }
        }
        let start = self.rng.random_range(0..n);
        for off in 0..n {
            let i1 = (start + off) % n;
            if self.take_step(i1, i2, observer) {
                return true;
            }
        }
        false
    }

    /// Bias from the free multipliers, or the midpoint of the KKT-feasible interval.
    fn final_bias(&self) -> T {
        let n = self.alpha.len();
        let free: Vec<usize> = (0..n).filter(|&i| self.is_free(i)).collect();
        if !free.is_empty() {
            let sum = free.iter().fold(T::zero(), |acc, &i| acc + self.y[i] - self.grad[i]);
            return sum / T::count(free.len());
        }
        let mut lower = T::neg_infinity();
        let mut upper = T::infinity();
        for i in 0..n {
            let v = self.y[i] - self.grad[i];
            let at_zero = self.alpha[i] == T::zero();
            let pos = self.y[i] > T::zero();
            if at_zero == pos {
                lower = lower.max(v);
            } else {
                upper = upper.min(v);
            }
        }
        match (lower.is_finite(), upper.is_finite()) {
            (true, true) => (lower + upper) / T::lit(2.0),
            (true, false) => lower,
            (false, true) => upper,
            (false, false) => T::zero(),
        }
    }

    fn max_violation(&self, b: T) -> T {
        (0..self.alpha.len()).fold(T::zero(), |worst, i| {
            let m = self.y[i] * (self.grad[i] + b);
            let v = if self.alpha[i] <= T::zero() {
                (T::one() - m).max(T::zero())
            } else if self.alpha[i] >= self.c {
                (m - T::one()).max(T::zero())
            } else {
                (m - T::one()).abs()
            };
            worst.max(v)
        })
    }
}

/// Solves the dual for a precomputed kernel matrix and labels in {-1, +1}.
///
/// The returned bias is the mean of `y_j - sum_i a_i y_i K_ij` over free
/// multipliers (or the KKT-interval midpoint when none are free), and every
/// row satisfies the KKT conditions within `tol` for that bias.
pub fn smo_solve<T: Scalar>(
    gram: &[Vec<T>],
    y: &[T],
    params: &SmoParams<T>,
    mut observer: Option<&mut dyn FnMut(&SmoUpdate<T>)>,
) -> Result<DualSolution<T>, SvmError> {
    let n = y.len();
    if gram.len() != n || gram.iter().any(|r| r.len() != n) {
        return Err(SvmError::LengthMismatch { expected: n, found: gram.len() });
    }
    if !(params.c > T::zero()) || !params.c.is_finite() {
        return Err(SvmError::InvalidInput(format!("box constraint must be positive, got {}", params.c)));
    }
    if !(params.tol > T::zero()) {
        return Err(SvmError::InvalidInput(format!("tolerance must be positive, got {}", params.tol)));
    }
    if y.iter().any(|&v| v != T::one() && v != -T::one()) {
        return Err(SvmError::InvalidInput("labels must be +1 or -1".into()));
    }
    if !y.iter().any(|&v| v > T::zero()) || !y.iter().any(|&v| v < T::zero()) {
        return Err(SvmError::SingleClass);
    }

    let max_passes = params.max_passes.unwrap_or(10 * n);
    let mut s = Solver {
        gram,
        y,
        c: params.c,
        tol: params.tol,
        eps: params.eps,
        snap: params.c * T::epsilon() * T::lit(16.0),
        alpha: vec![T::zero(); n],
        grad: vec![T::zero(); n],
        b: T::zero(),
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        updates: 0,
    };

    // A pass is n examinations: a full sweep, or several sweeps over the free multipliers.
    let mut examined = 0usize;
    let passes_done = |examined: usize| examined.div_ceil(n);
    let mut examine_all = true;
    loop {
        let mut changed = 0usize;
        while changed > 0 || examine_all {
            if examined >= max_passes * n {
                let passes = passes_done(examined);
                let b = s.final_bias();
                return Err(SvmError::NoConvergence {
                    passes,
                    violation: s.max_violation(b).to_f64_lossy(),
                    alpha: s.alpha.iter().map(|a| a.to_f64_lossy()).collect(),
                    bias: b.to_f64_lossy(),
                });
            }
            changed = 0;
            for i in 0..n {
                if examine_all || s.is_free(i) {
                    examined += 1;
                    if s.examine(i, &mut observer) {
                        changed += 1;
                    }
                }
            }
            if examine_all {
                examine_all = false;
            } else if changed == 0 {
                examine_all = true;
            }
        }
        // The loop converged with its running bias; confirm against the reported one.
        let b = s.final_bias();
        let violation = s.max_violation(b);
        if violation <= s.tol {
            return Ok(DualSolution {
                objective: s.objective(),
                alpha: s.alpha,
                bias: b,
                max_violation: violation,
                passes: passes_done(examined),
                updates: s.updates,
            });
        }
        s.b = b;
        examine_all = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svm::{gram_matrix, KernelParams};

    fn solve(x: &[Vec<f64>], y: &[f64], c: f64) -> DualSolution<f64> {
        let g = gram_matrix(x, &KernelParams::cubic(1.0, 1.0).unwrap());
        smo_solve(&g, y, &SmoParams::new(c, 1e-3, 0), None).unwrap()
    }

    #[test]
    fn two_points() {
        let x = vec![vec![-1.0], vec![1.0]];
        let y = [-1.0, 1.0];
        let sol = solve(&x, &y, 1.0);
        let g = gram_matrix(&x, &KernelParams::cubic(1.0, 1.0).unwrap());
        assert!(sol.decision(&y, &g[0]) < 0.0);
        assert!(sol.decision(&y, &g[1]) > 0.0);
        assert!((sol.alpha[0] - sol.alpha[1]).abs() < 1e-12);
    }

    #[test]
    fn xor_is_separated() {
        let x = vec![vec![1.0, 1.0], vec![-1.0, -1.0], vec![1.0, -1.0], vec![-1.0, 1.0]];
        let y = [1.0, 1.0, -1.0, -1.0];
        let sol = solve(&x, &y, 1.0);
        let g = gram_matrix(&x, &KernelParams::cubic(1.0, 1.0).unwrap());
        for i in 0..4 {
            assert!(y[i] * sol.decision(&y, &g[i]) > 0.0);
        }
    }

    #[test]
    fn rejects_single_class_and_bad_labels() {
        let g = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let p = SmoParams::new(1.0, 1e-3, 0);
        assert!(matches!(smo_solve(&g, &[1.0, 1.0], &p, None), Err(SvmError::SingleClass)));
        assert!(matches!(smo_solve(&g, &[1.0, 0.5], &p, None), Err(SvmError::InvalidInput(_))));
        assert!(matches!(smo_solve(&g, &[1.0], &p, None), Err(SvmError::LengthMismatch { .. })));
    }

    #[test]
    fn pass_budget_reports_best_iterate() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()]).collect();
        let y: Vec<f64> = (0..30).map(|i| if (i * 7) % 3 == 0 { 1.0 } else { -1.0 }).collect();
        let g = gram_matrix(&x, &KernelParams::cubic(1.0, 1.0).unwrap());
        let p = SmoParams { max_passes: Some(1), ..SmoParams::new(10.0, 1e-9, 0) };
        match smo_solve(&g, &y, &p, None) {
            Err(SvmError::NoConvergence { passes, alpha, violation, .. }) => {
                assert_eq!(passes, 1);
                assert_eq!(alpha.len(), 30);
                assert!(violation > 0.0);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn kkt_within_tolerance_and_monotone_objective() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64 * 0.71).sin() * 2.0, (i as f64 * 0.29).cos()]).collect();
        let y: Vec<f64> = x.iter().map(|r| if r[0] * r[1] + 0.1 * r[0] > 0.0 { 1.0 } else { -1.0 }).collect();
        let g = gram_matrix(&x, &KernelParams::cubic(1.0, 1.0).unwrap());
        let mut events = Vec::new();
        let mut obs = |e: &SmoUpdate<f64>| events.push(*e);
        let sol = smo_solve(&g, &y, &SmoParams::new(1.0, 1e-3, 3), Some(&mut obs)).unwrap();
        assert!(sol.max_violation <= 1e-3);
        assert!(!events.is_empty());
        for e in &events {
            assert!(e.objective_after >= e.objective_before - 1e-12 * e.objective_before.abs().max(1.0));
            assert!(e.alpha_y_sum.abs() < 1e-12);
        }
        let w = dual_objective(&sol.alpha, &y, &g);
        assert!((w - sol.objective).abs() < 1e-9);
        for i in 0..40 {
            let m = y[i] * sol.decision(&y, &g[i]);
            let a = sol.alpha[i];
            if a == 0.0 {
                assert!(m >= 1.0 - 1e-3);
            } else if a == 1.0 {
                assert!(m <= 1.0 + 1e-3);
            } else {
                assert!((m - 1.0).abs() <= 1e-3);
            }
        }
    }
}
