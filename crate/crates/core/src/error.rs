use thiserror::Error;

/// Errors produced anywhere in the design pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed input{}: {message}", row_suffix(*.row))]
    Malformed { row: Option<usize>, message: String },

    #[error("missing required column {0}")]
    MissingColumn(String),

    #[error("non-monotone time at row {row}")]
    NonMonotoneTime { row: usize },

    #[error("non-finite value in column {column} at row {row}")]
    NonFinite { column: String, row: usize },

    #[error("column {column} has {found} samples, expected {expected}")]
    LengthMismatch {
        column: String,
        expected: usize,
        found: usize,
    },

    #[error("unit mismatch for column {column}: expected {expected}, found {found}")]
    UnitMismatch {
        column: String,
        expected: String,
        found: String,
    },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("task {0} has no velocity/acceleration columns; differentiate it first")]
    MissingDerivatives(String),

    #[error("expected a {expected} objective, found {found}")]
    KindMismatch { expected: String, found: String },

    #[error("unidentifiable parameter(s) {}: {reason}", .parameters.join(", "))]
    Identifiability {
        parameters: Vec<String>,
        reason: String,
    },

    #[error("operation requires a full-rank benefit region, got {0}")]
    DegenerateRegion(String),

    #[error("no feasible grid point in the search box")]
    NoFeasibleGridPoint,

    #[error("objective is unbounded below")]
    Unbounded,

    #[error("solver did not converge: {0}")]
    NotConverged(String),

    #[error("{0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures of the numerical routines, as opposed to rejected
    /// inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Identifiability { .. }
                | Error::Unbounded
                | Error::NotConverged(_)
                | Error::NoFeasibleGridPoint
        )
    }

    pub(crate) fn malformed(row: Option<usize>, message: impl Into<String>) -> Self {
        Error::Malformed {
            row,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}

fn row_suffix(row: Option<usize>) -> String {
    row.map(|r| format!(" at row {r}")).unwrap_or_default()
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
