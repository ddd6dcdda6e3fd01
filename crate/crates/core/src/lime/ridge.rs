use super::LimeError;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeFit<T> {
    pub coefficients: Vec<T>,
    pub intercept: T,
}

impl<T: Scalar> RidgeFit<T> {
    pub fn predict(&self, x: &[T]) -> T {
        self.coefficients.iter().zip(x).fold(self.intercept, |acc, (&b, &v)| acc + b * v)
    }
}

/// Minimizes `sum_i w_i (y_i - b.x_i - b0)^2 + lambda |b|^2` with `b0` unpenalized.
///
/// Rows are centered on their weighted means, which removes the intercept from
/// the normal equations; the remaining system is solved by Cholesky.
pub fn weighted_ridge<T: Scalar>(samples: &[Vec<T>], targets: &[T], weights: &[T], lambda: T) -> Result<RidgeFit<T>, LimeError> {
    let n = samples.len();
    if targets.len() != n || weights.len() != n {
        return Err(LimeError::LengthMismatch { expected: n, found: targets.len().min(weights.len()) });
    }
    if n == 0 {
        return Err(LimeError::SingularSystem);
    }
    let d = samples[0].len();
    if samples.iter().any(|r| r.len() != d) {
        return Err(LimeError::LengthMismatch { expected: d, found: samples.iter().find(|r| r.len() != d).unwrap().len() });
    }
    if !(lambda >= T::zero()) || weights.iter().any(|&w| !(w >= T::zero())) {
        return Err(LimeError::InvalidConfig("ridge lambda and sample weights must be non-negative".into()));
    }
    let wsum: T = weights.iter().copied().sum();
    if !(wsum > T::zero()) {
        return Err(LimeError::SingularSystem);
    }

    // Means are accumulated as offsets from the first row so constant columns center exactly.
    let (x0, y0) = (&samples[0], targets[0]);
    let mut xbar = vec![T::zero(); d];
    let mut ybar = T::zero();
    for ((r, &y), &w) in samples.iter().zip(targets).zip(weights) {
        for ((m, &v), &o) in xbar.iter_mut().zip(r).zip(x0) {
            *m += w * (v - o);
        }
        ybar += w * (y - y0);
    }
    for (m, &o) in xbar.iter_mut().zip(x0) {
        *m = o + *m / wsum;
    }
    ybar = y0 + ybar / wsum;

    let mut a = vec![vec![T::zero(); d]; d];
    let mut rhs = vec![T::zero(); d];
    let mut centered = vec![T::zero(); d];
    for ((r, &y), &w) in samples.iter().zip(targets).zip(weights) {
        for j in 0..d {
            centered[j] = r[j] - xbar[j];
        }
        let yc = y - ybar;
        for j in 0..d {
            let wj = w * centered[j];
            rhs[j] += wj * yc;
            for k in 0..=j {
                a[j][k] += wj * centered[k];
            }
        }
    }
    for j in 0..d {
        a[j][j] += lambda;
    }
    let coefficients = cholesky_solve(a, rhs)?;
    let intercept = ybar - coefficients.iter().zip(&xbar).fold(T::zero(), |acc, (&b, &m)| acc + b * m);
    Ok(RidgeFit { coefficients, intercept })
}

/// Solves `A x = b` for symmetric positive-definite `A` given by its lower triangle.
fn cholesky_solve<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>, LimeError> {
    let d = b.len();
    let scale = (0..d).map(|j| a[j][j].abs()).fold(T::zero(), T::max);
    let floor = T::epsilon() * T::count(d.max(1)) * T::lit(16.0) * scale;
    for j in 0..d {
        let mut diag = a[j][j];
        for k in 0..j {
            diag -= a[j][k] * a[j][k];
        }
        if !(diag > floor) {
            return Err(LimeError::SingularSystem);
        }
        let l = diag.sqrt();
        a[j][j] = l;
        for i in j + 1..d {
            let mut v = a[i][j];
            for k in 0..j {
                v -= a[i][k] * a[j][k];
            }
            a[i][j] = v / l;
        }
    }
    for i in 0..d {
        let mut v = b[i];
        for k in 0..i {
            v -= a[i][k] * b[k];
        }
        b[i] = v / a[i][i];
    }
    for i in (0..d).rev() {
        let mut v = b[i];
        for k in i + 1..d {
            v -= a[k][i] * b[k];
        }
        b[i] = v / a[i][i];
    }
    Ok(b)
}

/// Weighted coefficient of determination; 0 when the targets do not vary.
pub fn weighted_r2<T: Scalar>(fit: &RidgeFit<T>, samples: &[Vec<T>], targets: &[T], weights: &[T]) -> T {
    let wsum: T = weights.iter().copied().sum();
    let y0 = targets.first().copied().unwrap_or_else(T::zero);
    let ybar = y0 + targets.iter().zip(weights).fold(T::zero(), |acc, (&y, &w)| acc + w * (y - y0)) / wsum;
    let (mut ss_res, mut ss_tot) = (T::zero(), T::zero());
    for ((r, &y), &w) in samples.iter().zip(targets).zip(weights) {
        let e = y - fit.predict(r);
        ss_res += w * e * e;
        ss_tot += w * (y - ybar) * (y - ybar);
    }
    if ss_tot > T::zero() {
        T::one() - ss_res / ss_tot
    } else {
        T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_linear_targets() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![(i as f64 * 0.3).sin(), (i as f64 * 0.7).cos()]).collect();
        let y: Vec<f64> = x.iter().map(|r| 2.0 * r[0] - r[1] + 0.5).collect();
        let w: Vec<f64> = (0..20).map(|i| 0.1 + i as f64 / 20.0).collect();
        let fit = weighted_ridge(&x, &y, &w, 0.0).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-10);
        assert!((fit.coefficients[1] + 1.0).abs() < 1e-10);
        assert!((fit.intercept - 0.5).abs() < 1e-10);
        assert!((weighted_r2(&fit, &x, &y, &w) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn heavy_penalty_gives_weighted_mean() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let y = [1.0f64, 3.0, 8.0];
        let w = [1.0, 1.0, 2.0];
        let fit = weighted_ridge(&x, &y, &w, 1e12).unwrap();
        assert!(fit.coefficients[0].abs() < 1e-10);
        let mean_y = (1.0 + 3.0 + 16.0) / 4.0;
        let mean_x = (0.0 + 1.0 + 4.0) / 4.0;
        assert!((fit.intercept + fit.coefficients[0] * mean_x - mean_y).abs() < 1e-12);
        assert!((fit.intercept - mean_y).abs() < 1e-9);
    }

    #[test]
    fn rank_deficient_without_penalty() {
        let x = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        let y = [1.0, 2.0, 3.0];
        let w = [1.0; 3];
        assert!(matches!(weighted_ridge(&x, &y, &w, 0.0), Err(LimeError::SingularSystem)));
        assert!(weighted_ridge(&x, &y, &w, 1e-3).is_ok());
    }

    #[test]
    fn constant_targets_have_zero_r2() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let y = [4.0; 3];
        let w = [1.0; 3];
        let fit = weighted_ridge(&x, &y, &w, 1.0).unwrap();
        assert_eq!(fit.coefficients, vec![0.0]);
        assert_eq!(weighted_r2(&fit, &x, &y, &w), 0.0);
    }
}
