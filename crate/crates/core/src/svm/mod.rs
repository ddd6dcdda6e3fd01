//! Cubic polynomial-kernel soft-margin SVM.
//!
//! Features are standardized with statistics from the training rows only,
//! the dual is solved by sequential minimal optimization, and an optional
//! Platt sigmoid maps decision values to probabilities of the positive class.

mod kernel;
mod model;
mod platt;
mod smo;
mod standardize;

pub use kernel::{cubic_kernel, gram_matrix, KernelParams};
pub use model::{load_model, save_model, smo_train, SvmConfig, SvmModel, MODEL_VERSION};
pub use platt::{platt_calibrate, platt_nll, PlattParams};
pub use smo::{dual_objective, smo_solve, DualSolution, SmoParams, SmoUpdate};
pub use standardize::{standardize_fit, Standardization};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid kernel parameters: {0}")]
    InvalidKernel(String),
    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("SMO did not converge after {passes} passes (max KKT violation {violation:.3e})")]
    NoConvergence {
        passes: usize,
        violation: f64,
        /// Last iterate: multipliers and bias.
        alpha: Vec<f64>,
        bias: f64,
    },
    #[error("Platt calibration did not converge after {iterations} iterations (gradient norm {gradient_norm:.3e})")]
    CalibrationNoConvergence { iterations: usize, gradient_norm: f64 },
    #[error("model document: {0}")]
    SchemaViolation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
