use std::fmt;

use serde::{Deserialize, Serialize};

/// Pipeline step that produced an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Parse,
    Config,
    Ingest,
    Quadratics,
    Regions,
    Solve,
    Evaluate,
    Write,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Parse => "parse",
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Quadratics => "quadratics",
            Stage::Regions => "regions",
            Stage::Solve => "solve",
            Stage::Evaluate => "evaluate",
            Stage::Write => "write",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorClass {
    /// Rejected input: bad config, file, payload or parameter.
    Validation,
    /// A numerical routine failed on valid input.
    Numerical,
    /// Unknown task id or resource.
    NotFound,
}

/// Error tagged with the stage it came from; also the service's error body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct StageError {
    pub stage: Stage,
    pub class: ErrorClass,
    pub message: String,
}

impl StageError {
    pub fn validation(stage: Stage, message: impl Into<String>) -> Self {
        StageError {
            stage,
            class: ErrorClass::Validation,
            message: message.into(),
        }
    }

    pub fn not_found(stage: Stage, message: impl Into<String>) -> Self {
        StageError {
            stage,
            class: ErrorClass::NotFound,
            message: message.into(),
        }
    }

    pub fn from_core(stage: Stage, err: pea_design::Error) -> Self {
        let class = if err.is_numerical() {
            ErrorClass::Numerical
        } else {
            ErrorClass::Validation
        };
        StageError {
            stage,
            class,
            message: err.to_string(),
        }
    }

    /// Prefixes the message with where the failure happened, e.g. a file.
    pub fn with_context(mut self, context: &str) -> Self {
        self.message = format!("{context}: {}", self.message);
        self
    }

    /// Process exit status: 1 for rejected input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self.class {
            ErrorClass::Numerical => 2,
            ErrorClass::Validation | ErrorClass::NotFound => 1,
        }
    }
}

pub type StageResult<T> = std::result::Result<T, StageError>;

/// Attaches a stage to core results.
pub trait AtStage<T> {
    fn at(self, stage: Stage) -> StageResult<T>;
}

impl<T> AtStage<T> for pea_design::Result<T> {
    fn at(self, stage: Stage) -> StageResult<T> {
        self.map_err(|e| StageError::from_core(stage, e))
    }
}
