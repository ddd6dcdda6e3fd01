use serde::{Deserialize, Serialize};

use super::SvmError;
use crate::Scalar;

/// Columns whose spread falls below this are treated as constant.
const MIN_STD: f64 = 1e-12;

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization<T> {
    pub means: Vec<T>,
    pub stds: Vec<T>,
    /// Columns that were constant in the fitting rows (their std is set to 1).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constant_columns: Vec<usize>,
}

impl<T: Scalar> Standardization<T> {
    pub fn n_features(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, x: &[T]) -> Result<Vec<T>, SvmError> {
        if x.len() != self.means.len() {
            return Err(SvmError::LengthMismatch { expected: self.means.len(), found: x.len() });
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &[T]) -> Vec<T> {
        x.iter().zip(&self.means).zip(&self.stds).map(|((&v, &m), &s)| (v - m) / s).collect()
    }

    pub fn apply_rows(&self, rows: &[Vec<T>]) -> Result<Vec<Vec<T>>, SvmError> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}

pub fn standardize_fit<T: Scalar>(rows: &[Vec<T>]) -> Result<Standardization<T>, SvmError> {
    if rows.len() < 2 {
        return Err(SvmError::TooFewRows(rows.len()));
    }
    let d = rows[0].len();
    if let Some(r) = rows.iter().find(|r| r.len() != d) {
        return Err(SvmError::LengthMismatch { expected: d, found: r.len() });
    }
    let n = T::count(rows.len());
    let mut means = vec![T::zero(); d];
    for r in rows {
        for (m, &v) in means.iter_mut().zip(r) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut stds = vec![T::zero(); d];
    for r in rows {
        for ((s, &v), &m) in stds.iter_mut().zip(r).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    let mut constant_columns = Vec::new();
    for (j, s) in stds.iter_mut().enumerate() {
        *s = (*s / n).sqrt();
        if !(*s >= T::lit(MIN_STD)) {
            log::warn!("feature column {j} is constant in the fitting rows; using unit scale");
            constant_columns.push(j);
            *s = T::one();
        }
    }
    Ok(Standardization { means, stds, constant_columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_point_column() {
        let s = standardize_fit(&[vec![1.0f64], vec![3.0]]).unwrap();
        assert_eq!((s.means[0], s.stds[0]), (2.0, 1.0));
        assert!(s.constant_columns.is_empty());
    }

    #[test]
    fn constant_column_flagged() {
        let s = standardize_fit(&[vec![5.0f64, 1.0], vec![5.0, 2.0], vec![5.0, 3.0]]).unwrap();
        assert_eq!((s.means[0], s.stds[0]), (5.0, 1.0));
        assert_eq!(s.constant_columns, vec![0]);
    }

    #[test]
    fn too_few_rows() {
        assert!(matches!(standardize_fit(&[vec![1.0f64]]), Err(SvmError::TooFewRows(1))));
    }

    proptest! {
        #[test]
        fn standardized_columns(rows in proptest::collection::vec(proptest::collection::vec(-50.0f64..50.0, 3), 3..40)) {
            let s = standardize_fit(&rows).unwrap();
            prop_assume!(s.constant_columns.is_empty());
            let z = s.apply_rows(&rows).unwrap();
            let n = z.len() as f64;
            for j in 0..3 {
                let mean: f64 = z.iter().map(|r| r[j]).sum::<f64>() / n;
                let var: f64 = z.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
                prop_assert!(mean.abs() < 1e-10);
                prop_assert!((var.sqrt() - 1.0).abs() < 1e-10);
            }
        }
    }
}
