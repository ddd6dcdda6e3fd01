use serde::{Deserialize, Serialize};

use super::SvmError;
use crate::scalar::dot;
use crate::Scalar;

/// Inhomogeneous polynomial kernel `(offset + <x, z> / scale^2)^degree`, degree fixed at 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams<T> {
    pub degree: u32,
    pub scale: T,
    pub offset: T,
}

impl<T: Scalar> KernelParams<T> {
    pub fn cubic(scale: T, offset: T) -> Result<Self, SvmError> {
        let k = Self { degree: 3, scale, offset };
        k.validate()?;
        Ok(k)
    }

    /// Scale `sqrt(d)` and offset 1 for `d` features.
    pub fn auto(n_features: usize) -> Self {
        Self { degree: 3, scale: T::count(n_features.max(1)).sqrt(), offset: T::one() }
    }

    pub fn validate(&self) -> Result<(), SvmError> {
        if self.degree != 3 {
            return Err(SvmError::InvalidKernel(format!("degree must be 3, got {}", self.degree)));
        }
        if !(self.scale > T::zero()) || !self.scale.is_finite() {
            return Err(SvmError::InvalidKernel(format!("scale must be positive, got {}", self.scale)));
        }
        if !self.offset.is_finite() {
            return Err(SvmError::InvalidKernel(format!("offset must be finite, got {}", self.offset)));
        }
        Ok(())
    }

    /// Kernel value without length checks.
    #[inline]
    pub fn eval(&self, x: &[T], z: &[T]) -> T {
        let t = self.offset + dot(x, z) / (self.scale * self.scale);
        t * t * t
    }
}

pub fn cubic_kernel<T: Scalar>(x: &[T], z: &[T], k: &KernelParams<T>) -> Result<T, SvmError> {
    if x.len() != z.len() {
        return Err(SvmError::LengthMismatch { expected: x.len(), found: z.len() });
    }
    Ok(k.eval(x, z))
}

/// Dense kernel matrix of `rows` against themselves.
pub fn gram_matrix<T: Scalar>(rows: &[Vec<T>], k: &KernelParams<T>) -> Vec<Vec<T>> {
    let n = rows.len();
    let mut g = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let v = k.eval(&rows[i], &rows[j]);
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    g
}
