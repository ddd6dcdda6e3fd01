use std::fmt;

/// Failure of a subcommand, carrying its exit code class.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation: missing flag, missing file, malformed settings. Exit 2.
    Usage(String),
    /// Input data could not be read or is inconsistent. Exit 3.
    Data(String),
    /// A numerical routine did not converge. Exit 4.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<amyloid_core::Error> for CliError {
    fn from(e: amyloid_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

macro_rules! via_core {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                amyloid_core::Error::from(e).into()
            }
        })*
    };
}

via_core!(
    amyloid_core::volume::VolumeError,
    amyloid_core::parcellation::ParcellationError,
    amyloid_core::cohort::CohortError,
    amyloid_core::svm::SvmError,
    amyloid_core::evaluation::EvalError,
    amyloid_core::lime::LimeError,
    amyloid_core::phantom::PhantomError
);

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(format!("i/o failure: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
