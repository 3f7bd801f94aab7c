use std::fmt;

use elabsimp_core::alignment::AlignError;
use elabsimp_core::annotation::AnnotationError;
use elabsimp_core::corpus::CorpusError;
use elabsimp_core::evaluation::EvaluationError;
use elabsimp_core::generation::GenerationError;
use elabsimp_core::instance::InstanceError;
use elabsimp_core::jsonl::JsonlError;
use elabsimp_core::specificity::SpecificityError;

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_BACKEND: u8 = 2;

/// A failed stage, tagged with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn validation(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            error: error.into(),
        }
    }

    pub fn backend(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_BACKEND,
            error: error.into(),
        }
    }

    pub fn context(self, msg: impl fmt::Display + Send + Sync + 'static) -> Self {
        Self {
            code: self.code,
            error: self.error.context(msg),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Shorthand for a validation failure with a formatted message.
macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::CliError::validation(anyhow::anyhow!($($arg)*))
    };
}
pub(crate) use invalid;

macro_rules! validation_errors {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                Self::validation(e)
            }
        })*
    };
}

validation_errors!(
    AnnotationError,
    CorpusError,
    EvaluationError,
    InstanceError,
    JsonlError,
    std::io::Error,
    serde_json::Error
);

impl From<AlignError> for CliError {
    fn from(e: AlignError) -> Self {
        match e {
            AlignError::Backend(_) => Self::backend(e),
            _ => Self::validation(e),
        }
    }
}

impl From<SpecificityError> for CliError {
    fn from(e: SpecificityError) -> Self {
        match e {
            SpecificityError::Backend(_) => Self::backend(e),
            _ => Self::validation(e),
        }
    }
}

impl From<GenerationError> for CliError {
    fn from(e: GenerationError) -> Self {
        if e.is_backend() {
            Self::backend(e)
        } else {
            Self::validation(e)
        }
    }
}
