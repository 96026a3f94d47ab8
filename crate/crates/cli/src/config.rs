//! Project configuration: which task files to load and how each one enters
//! the design problem.

use std::path::{Path, PathBuf};

use pea_design::{ObjectiveKind, ScalingSpec, TaskFormat, TaskWeights};
use serde::{Deserialize, Serialize};

use crate::error::{Stage, StageError, StageResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// The single task whose cost is minimized.
    Objective,
    /// A task whose benefit region the design must stay inside.
    Constraint,
    /// A term of the weighted-sum objective.
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskRef {
    /// Trajectory file, relative to the config file.
    pub path: PathBuf,
    pub role: Role,
    /// Required for `weighted`, rejected otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    /// Inferred from the file extension when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<TaskFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingSpec<f64>>,
    /// Interior offset for a `constraint` task (same units as its cost).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

impl TaskRef {
    pub fn resolved_format(&self) -> StageResult<TaskFormat> {
        if let Some(f) = self.format {
            return Ok(f);
        }
        let ext = self.path.extension().and_then(|e| e.to_str()).unwrap_or("");
        ext.parse::<TaskFormat>().map_err(|_| {
            StageError::validation(
                Stage::Config,
                format!("cannot infer format of {}; set \"format\" to csv or json", self.path.display()),
            )
        })
    }
}

fn default_tol() -> f64 {
    1e-8
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub tasks: Vec<TaskRef>,
    /// MotorParams JSON file, relative to the config file. Without a motor
    /// the generic effort model is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motor: Option<PathBuf>,
    pub objective_kind: ObjectiveKind,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Add the motor's peak and torque–speed rows (only with a motor).
    #[serde(default = "default_true")]
    pub feasibility: bool,
    /// Also bound every sample by the continuous torque.
    #[serde(default)]
    pub continuous_rows: bool,
    /// Directory the relative paths above are resolved against. Set by
    /// [`ProjectConfig::load`]; not part of the file.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ProjectConfig {
    pub fn from_json(text: &str) -> StageResult<Self> {
        let config: ProjectConfig =
            serde_json::from_str(text).map_err(|e| StageError::validation(Stage::Parse, e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> StageResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| StageError::validation(Stage::Config, format!("reading {}: {e}", path.display())))?;
        let mut config = Self::from_json(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn validate(&self) -> StageResult<()> {
        let err = |m: String| Err(StageError::validation(Stage::Config, m));
        if self.tasks.is_empty() {
            return err("config lists no tasks".into());
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return err(format!("tol must be positive, got {}", self.tol));
        }
        if self.objective_kind == ObjectiveKind::MotorEnergy && self.motor.is_none() {
            return err("objective_kind motor-energy needs a motor".into());
        }
        let count = |role: Role| self.tasks.iter().filter(|t| t.role == role).count();
        let (objectives, weighted) = (count(Role::Objective), count(Role::Weighted));
        match (objectives, weighted) {
            (1, 0) | (0, 1..) => {}
            (0, 0) => return err("no task has role objective or weighted".into()),
            (o, 0) => return err(format!("{o} tasks have role objective; exactly one is allowed")),
            _ => return err("roles objective and weighted cannot be mixed".into()),
        }
        for (i, task) in self.tasks.iter().enumerate() {
            match (task.role, task.weight) {
                (Role::Weighted, None) => return err(format!("task {i} is weighted but has no weight")),
                (Role::Objective | Role::Constraint, Some(_)) => {
                    return err(format!("task {i} has a weight but role is not weighted"))
                }
                _ => {}
            }
            if let Some(m) = task.margin {
                if task.role != Role::Constraint {
                    return err(format!("task {i} has a margin but role is not constraint"));
                }
                if !(m >= 0.0 && m.is_finite()) {
                    return err(format!("task {i} margin must be nonnegative, got {m}"));
                }
            }
            if let Some(s) = &task.scaling {
                s.validate().map_err(|e| StageError::validation(Stage::Config, format!("task {i}: {e}")))?;
            }
            task.resolved_format()?;
        }
        if weighted > 0 {
            TaskWeights::new(self.weights())
                .map_err(|e| StageError::validation(Stage::Config, format!("weights: {e}")))?;
        }
        Ok(())
    }

    /// Weights of the `weighted` tasks, in config order.
    pub fn weights(&self) -> Vec<f64> {
        self.tasks.iter().filter(|t| t.role == Role::Weighted).filter_map(|t| t.weight).collect()
    }
}
