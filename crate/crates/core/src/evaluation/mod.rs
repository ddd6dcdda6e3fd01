//! Cross-validation and classification metrics. `Pos` is the positive class.

mod cv;
mod kfold;
mod metrics;
mod roc;

pub use cv::{cross_validate, cross_validate_with, CvPrediction, CvReport, FoldAudit, FoldReport};
pub use kfold::stratified_kfold;
pub use metrics::{compute_metrics, f1_from_rates, ConfusionCounts, Metric, Metrics};
pub use roc::{mann_whitney_auc, roc_auc, score_predictions, RocCurve, ScoreSummary};

use thiserror::Error;

use crate::svm::SvmError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("k must be at least 2, got {0}")]
    BadK(usize),
    #[error("class {class} has {count} members, fewer than k = {k}")]
    ClassTooSmall { class: crate::Label, count: usize, k: usize },
    #[error("scores need both classes present")]
    SingleClass,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("training failed: {0}")]
    Svm(#[from] SvmError),
}
