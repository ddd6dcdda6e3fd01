use thiserror::Error;

use crate::cohort::CohortError;
use crate::evaluation::EvalError;
use crate::lime::LimeError;
use crate::parcellation::ParcellationError;
use crate::phantom::PhantomError;
use crate::svm::SvmError;
use crate::volume::VolumeError;

/// Any failure raised by the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Volume(#[from] VolumeError),
    #[error(transparent)]
    Parcellation(#[from] ParcellationError),
    #[error(transparent)]
    Cohort(#[from] CohortError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Lime(#[from] LimeError),
    #[error(transparent)]
    Phantom(#[from] PhantomError),
}

impl Error {
    /// True when the failure comes from a numerical routine that ran out of
    /// iterations rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Svm(SvmError::NoConvergence { .. })
                | Error::Svm(SvmError::CalibrationNoConvergence { .. })
                | Error::Eval(EvalError::Svm(SvmError::NoConvergence { .. }))
                | Error::Lime(LimeError::SingularSystem)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
