//! Three-dimensional scalar volumes and their NIfTI-1 encoding.

mod nifti;

pub use nifti::{
    decode_nifti, encode_nifti, read_nifti, write_nifti, write_nifti_with, StorageType,
    WriteOptions, NIFTI_INTENT_ESTIMATE, NIFTI_INTENT_LABEL,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error)]
pub enum VolumeError {
    #[error("not a single-file NIfTI-1 volume: {0}")]
    BadMagic(String),
    #[error("unsupported NIfTI datatype code {0}")]
    UnsupportedDatatype(i16),
    #[error("expected a 3-D volume: {0}")]
    DimensionMismatch(String),
    #[error("truncated file: need {expected} bytes, found {found}")]
    TruncatedFile { expected: usize, found: usize },
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("invalid volume: {0}")]
    InvalidVolume(String),
    #[error("i/o failure: {0}")]
    IoFailure(#[from] std::io::Error),
}

/// What the voxel values of a volume mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Intent {
    /// Tracer uptake (PET intensities).
    Uptake,
    /// Integer atlas labels; 0 is background.
    Labels,
    /// Real-valued maps such as projected explanation weights.
    Weights,
}

/// A scalar field on a regular grid, stored x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume3D<T> {
    dims: [usize; 3],
    spacing: [T; 3],
    affine: [[T; 4]; 4],
    data: Vec<T>,
    intent: Intent,
}

impl<T: Scalar> Volume3D<T> {
    pub fn new(
        dims: [usize; 3],
        spacing: [T; 3],
        affine: [[T; 4]; 4],
        data: Vec<T>,
        intent: Intent,
    ) -> Result<Self, VolumeError> {
        if dims.iter().any(|&d| d == 0) {
            return Err(VolumeError::InvalidVolume(format!("zero-sized dimension in {dims:?}")));
        }
        let n = dims[0] * dims[1] * dims[2];
        if data.len() != n {
            return Err(VolumeError::InvalidVolume(format!(
                "{} voxels stored for dims {dims:?} ({n} expected)",
                data.len()
            )));
        }
        if spacing.iter().any(|&s| !(s > T::zero()) || !s.is_finite()) {
            return Err(VolumeError::InvalidVolume(format!("non-positive spacing {spacing:?}")));
        }
        let last = affine[3];
        if last != [T::zero(), T::zero(), T::zero(), T::one()] {
            return Err(VolumeError::InvalidVolume(format!("affine last row is {last:?}")));
        }
        if intent == Intent::Labels {
            check_labels(&data)?;
        }
        Ok(Self { dims, spacing, affine, data, intent })
    }

    /// Volume with a diagonal voxel-to-world affine built from `spacing`.
    pub fn from_data(
        dims: [usize; 3],
        spacing: [T; 3],
        data: Vec<T>,
        intent: Intent,
    ) -> Result<Self, VolumeError> {
        Self::new(dims, spacing, diagonal_affine(spacing), data, intent)
    }

    /// Zero-filled volume on the same grid as `self`.
    pub fn zeros_like(&self, intent: Intent) -> Self {
        Self {
            dims: self.dims,
            spacing: self.spacing,
            affine: self.affine,
            data: vec![T::zero(); self.data.len()],
            intent,
        }
    }

    /// Same grid and geometry, new voxel data.
    pub fn with_data(&self, data: Vec<T>, intent: Intent) -> Result<Self, VolumeError> {
        Self::new(self.dims, self.spacing, self.affine, data, intent)
    }

    /// Re-tags the volume, validating label content when switching to `Labels`.
    pub fn with_intent(mut self, intent: Intent) -> Result<Self, VolumeError> {
        if intent == Intent::Labels {
            check_labels(&self.data)?;
        }
        self.intent = intent;
        Ok(self)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [T; 3] {
        self.spacing
    }

    pub fn affine(&self) -> [[T; 4]; 4] {
        self.affine
    }

    pub fn intent(&self) -> Intent {
        self.intent
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> Option<T> {
        if x < self.dims[0] && y < self.dims[1] && z < self.dims[2] {
            Some(self.data[self.index(x, y, z)])
        } else {
            None
        }
    }

    /// Same voxel grid dimensions as `other`.
    pub fn same_grid<U: Scalar>(&self, other: &Volume3D<U>) -> bool {
        self.dims == other.dims
    }

    /// Converts voxel values into another scalar type.
    pub fn cast<U: Scalar>(&self) -> Volume3D<U> {
        let c = |v: T| U::from(v).unwrap_or_else(U::nan);
        Volume3D {
            dims: self.dims,
            spacing: self.spacing.map(c),
            affine: self.affine.map(|row| row.map(c)),
            data: self.data.iter().map(|&v| c(v)).collect(),
            intent: self.intent,
        }
    }
}

pub fn diagonal_affine<T: Scalar>(spacing: [T; 3]) -> [[T; 4]; 4] {
    let z = T::zero();
    [
        [spacing[0], z, z, z],
        [z, spacing[1], z, z],
        [z, z, spacing[2], z],
        [z, z, z, T::one()],
    ]
}

fn check_labels<T: Scalar>(data: &[T]) -> Result<(), VolumeError> {
    // Labels are stored as int16 on disk.
    let max = T::lit(i16::MAX as f64);
    if let Some(v) = data
        .iter()
        .find(|&&v| !(v >= T::zero()) || v.fract() != T::zero() || v > max)
    {
        return Err(VolumeError::InvalidVolume(format!(
            "label volume holds non-integer or negative value {v}"
        )));
    }
    Ok(())
}
