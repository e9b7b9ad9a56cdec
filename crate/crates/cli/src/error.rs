use thiserror::Error;
use triality_core::ErrorClass;

/// Exit status for a malformed scenario or command line.
pub const EXIT_PARSE: i32 = 2;
/// Exit status for a state, detector or parameter that violates an invariant.
pub const EXIT_VALIDATION: i32 = 3;
/// Exit status for inputs whose dimensions disagree.
pub const EXIT_DIMENSION: i32 = 4;
/// Exit status for a computation that failed on well-formed input.
pub const EXIT_NUMERIC: i32 = 5;
/// Exit status for failures reading inputs or writing reports.
pub const EXIT_IO: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),

    #[error("{location}: {source}")]
    Core {
        location: String,
        #[source]
        source: triality_core::Error,
    },

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Io(_) => EXIT_IO,
            CliError::Core { source, .. } => match source.class() {
                ErrorClass::Validation => EXIT_VALIDATION,
                ErrorClass::Dimension => EXIT_DIMENSION,
                ErrorClass::Numeric => EXIT_NUMERIC,
            },
        }
    }
}

/// Attaches a location (file and key) to core errors.
pub trait Locate<T> {
    fn at(self, location: impl Into<String>) -> Result<T, CliError>;
}

impl<T> Locate<T> for triality_core::Result<T> {
    fn at(self, location: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core {
            location: location.into(),
            source,
        })
    }
}
