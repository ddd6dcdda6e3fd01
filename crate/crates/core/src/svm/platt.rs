//! Platt sigmoid fit `P(pos | f) = 1 / (1 + exp(A f + B))`.
//!
//! Newton's method with backtracking on the smoothed-target negative
//! log-likelihood, in the numerically stable form of Lin, Lin and Weng.
//! Arithmetic is carried out in f64 whatever the scalar type.

use serde::{Deserialize, Serialize};

use super::SvmError;
use crate::Scalar;

const STOP_GRADIENT: f64 = 1e-10;
const ACCEPT_GRADIENT: f64 = 1e-6;
const MIN_STEP: f64 = 1e-10;
const HESSIAN_RIDGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlattParams<T> {
    #[serde(rename = "A")]
    pub a: T,
    #[serde(rename = "B")]
    pub b: T,
}

impl<T: Scalar> PlattParams<T> {
    /// Calibrated probability of the positive class.
    pub fn probability(&self, f: T) -> T {
        let z = self.a * f + self.b;
        if z >= T::zero() {
            let e = (-z).exp();
            e / (T::one() + e)
        } else {
            T::one() / (T::one() + z.exp())
        }
    }
}

fn targets(labels: &[f64]) -> Result<(f64, f64), SvmError> {
    let n_pos = labels.iter().filter(|&&y| y > 0.0).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    if n_pos == 0.0 || n_neg == 0.0 {
        return Err(SvmError::SingleClass);
    }
    Ok(((n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0)))
}

fn nll(f: &[f64], t: &[f64], a: f64, b: f64) -> f64 {
    f.iter()
        .zip(t)
        .map(|(&fi, &ti)| {
            let z = a * fi + b;
            if z >= 0.0 {
                ti * z + (-z).exp().ln_1p()
            } else {
                (ti - 1.0) * z + z.exp().ln_1p()
            }
        })
        .sum()
}

fn prob(z: f64) -> f64 {
    if z >= 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

fn prepare<T: Scalar>(decision_values: &[T], labels: &[T]) -> Result<(Vec<f64>, Vec<f64>), SvmError> {
    if decision_values.len() != labels.len() {
        return Err(SvmError::LengthMismatch { expected: decision_values.len(), found: labels.len() });
    }
    let f: Vec<f64> = decision_values.iter().map(|v| v.to_f64_lossy()).collect();
    if f.iter().any(|v| !v.is_finite()) {
        return Err(SvmError::InvalidInput("decision values must be finite".into()));
    }
    let y: Vec<f64> = labels.iter().map(|v| v.to_f64_lossy()).collect();
    let (hi, lo) = targets(&y)?;
    Ok((f, y.iter().map(|&v| if v > 0.0 { hi } else { lo }).collect()))
}

/// Smoothed-target negative log-likelihood at `(A, B)`.
pub fn platt_nll<T: Scalar>(decision_values: &[T], labels: &[T], params: &PlattParams<T>) -> Result<T, SvmError> {
    let (f, t) = prepare(decision_values, labels)?;
    Ok(T::lit(nll(&f, &t, params.a.to_f64_lossy(), params.b.to_f64_lossy())))
}

pub fn platt_calibrate<T: Scalar>(decision_values: &[T], labels: &[T], max_iter: usize) -> Result<PlattParams<T>, SvmError> {
    let (f, t) = prepare(decision_values, labels)?;
    let n_pos = labels.iter().filter(|&&y| y > T::zero()).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;

    let mut a = 0.0;
    let mut b = ((n_neg + 1.0) / (n_pos + 1.0)).ln();
    let mut fval = nll(&f, &t, a, b);
    let mut gnorm = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (HESSIAN_RIDGE, HESSIAN_RIDGE, 0.0, 0.0, 0.0);
        for (&fi, &ti) in f.iter().zip(&t) {
            let p = prob(a * fi + b);
            let d2 = p * (1.0 - p);
            h11 += fi * fi * d2;
            h22 += d2;
            h21 += fi * d2;
            let d1 = ti - p;
            g1 += fi * d1;
            g2 += d1;
        }
        gnorm = g1.hypot(g2);
        if g1.abs() < STOP_GRADIENT && g2.abs() < STOP_GRADIENT {
            break;
        }
        iterations += 1;
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        let mut accepted = false;
        while step >= MIN_STEP {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = nll(&f, &t, na, nb);
            if nf <= fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if !accepted {
            // No further decrease representable; accept if already at a stationary point.
            break;
        }
    }
    let (g1, g2) = f.iter().zip(&t).fold((0.0, 0.0), |(g1, g2), (&fi, &ti)| {
        let d1 = ti - prob(a * fi + b);
        (g1 + fi * d1, g2 + d1)
    });
    gnorm = gnorm.min(g1.hypot(g2));
    if !(g1.hypot(g2) <= ACCEPT_GRADIENT) {
        return Err(SvmError::CalibrationNoConvergence { iterations, gradient_norm: gnorm });
    }
    Ok(PlattParams { a: T::lit(a), b: T::lit(b) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antisymmetric_scores() {
        let f = [-2.0f64, -1.0, -0.5, 0.5, 1.0, 2.0];
        let y = [-1.0, -1.0, 1.0, -1.0, 1.0, 1.0];
        let p = platt_calibrate(&f, &y, 100).unwrap();
        assert!(p.b.abs() < 1e-9);
        assert!((p.probability(0.0) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn separated_scores_are_monotone() {
        let f = [-2.0, -1.0, 1.0, 2.0];
        let y = [-1.0, -1.0, 1.0, 1.0];
        let p = platt_calibrate(&f, &y, 100).unwrap();
        assert!(p.a < 0.0);
        let probs: Vec<f64> = [-3.0, -1.0, 0.0, 1.0, 3.0].iter().map(|&v| p.probability(v)).collect();
        assert!(probs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn single_class_rejected() {
        assert!(matches!(platt_calibrate(&[1.0, 2.0], &[1.0, 1.0], 100), Err(SvmError::SingleClass)));
    }

    #[test]
    fn probability_saturates_without_overflow() {
        let p = PlattParams { a: -1.0f64, b: 0.0 };
        assert_eq!(p.probability(1e6), 1.0);
        assert_eq!(p.probability(-1e6), 0.0);
    }
}
