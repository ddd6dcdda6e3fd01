//! Explainable amyloid PET classification.
//!
//! The pipeline runs from atlas-aligned PET volumes to classifier explanations:
//!
//! * [`volume`] reads and writes NIfTI-1 volumes.
//! * [`parcellation`] turns a scan plus a label atlas into cerebellum-normalized
//!   regional SUVR features.
//! * [`cohort`] holds the two-reader labels and their agreement statistics.
//! * [`svm`] trains a cubic polynomial-kernel SVM with sequential minimal
//!   optimization, with optional Platt calibration.
//! * [`evaluation`] runs stratified k-fold cross-validation and computes the
//!   confusion-matrix metrics, ROC curve and AUC.
//! * [`lime`] fits local weighted-ridge surrogates around single scans,
//!   aggregates region weights over the cohort and paints them back into
//!   atlas space.
//! * [`phantom`] generates a synthetic cohort with known ground truth.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`, which is what the command-line tool uses.

pub mod cohort;
pub mod error;
pub mod evaluation;
pub mod lime;
pub mod parcellation;
pub mod phantom;
pub mod scalar;
pub mod svm;
pub mod volume;

pub mod fsutil;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use cohort::{Cohort, Consensus, Label, ScanRecord, SubsetPolicy};
pub use evaluation::{ConfusionCounts, Metric, Metrics};
pub use parcellation::{Region, RegionTable};

/// Three-dimensional volume with `f64` voxels.
pub type Volume = volume::Volume3D<f64>;
/// Label atlas over an `f64` volume grid.
pub type Atlas = parcellation::AtlasParcellation<f64>;
pub type FeatureMatrix = parcellation::FeatureMatrix<f64>;
pub type FeatureVector = parcellation::FeatureVector<f64>;
pub type Dataset = cohort::Dataset<f64>;
pub type Kernel = svm::KernelParams<f64>;
pub type Model = svm::SvmModel<f64>;
pub type SvmConfig = svm::SvmConfig<f64>;
pub type CvReport = evaluation::CvReport<f64>;
pub type RocCurve = evaluation::RocCurve<f64>;
pub type LimeConfig = lime::LimeConfig<f64>;
pub type Explanation = lime::Explanation<f64>;
pub type AggregateExplanation = lime::AggregateExplanation<f64>;
pub type PhantomSpec = phantom::PhantomSpec<f64>;

/// Single-precision variants.
pub mod f32 {
    pub type Volume = crate::volume::Volume3D<f32>;
    pub type Model = crate::svm::SvmModel<f32>;
    pub type FeatureMatrix = crate::parcellation::FeatureMatrix<f32>;
    pub type SvmConfig = crate::svm::SvmConfig<f32>;
}
