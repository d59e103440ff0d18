use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable `{name}`: lower bound {lower} exceeds upper bound {upper}")]
    BoundInversion { name: String, lower: f64, upper: f64 },

    #[error("variable names must be nonempty")]
    EmptyName,

    #[error("name `{0}` is already in use")]
    DuplicateName(String),

    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),

    #[error("unknown variable id {0}")]
    UnknownVariable(usize),

    #[error("unknown variable `{0}`")]
    UnknownVariableName(String),

    #[error("unknown constraint id {0}")]
    UnknownConstraint(usize),

    #[error("unknown constraint label(s): {0}")]
    UnknownLabel(String),

    #[error("constraint `{0}`: cone terms are only allowed on <= rows")]
    ConeSense(String),

    #[error("invalid cone term: {0}")]
    InvalidCone(String),

    #[error("no value supplied for variable `{0}`")]
    MissingValue(String),

    #[error("model contains cone terms; standard form requires a cone-free model")]
    ConeInStandardForm,

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("unsupported distribution for this operation: {0}")]
    UnsupportedDistribution(String),

    #[error("constraint `{0}` carries uncertainty but is not a <= row; normalize it first")]
    UncertainSense(String),

    #[error("duplicate uncertain entry for constraint `{constraint}`, target `{target}`")]
    DuplicateUncertainEntry { constraint: String, target: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("instance validation failed: {0}")]
    Validation(String),

    #[error("{count} uncertain entries exceed the corner enumeration cap of {cap}; use Monte Carlo instead")]
    TooManyEntries { count: usize, cap: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
