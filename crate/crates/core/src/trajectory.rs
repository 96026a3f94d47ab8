//! Task trajectories: loading, validation, differentiation and body scaling.
//!
//! Two on-disk forms are accepted. CSV files carry a header row using the
//! column names `t,q_l,dq_l,ddq_l,tau_l` (the two derivative columns are
//! optional) and may be preceded by `#` comment lines such as
//!
//! ```text
//! # name: walk
//! # units: t=s, q_l=rad, dq_l=rad/s, ddq_l=rad/s^2, tau_l=N*m
//! ```
//!
//! JSON files hold `{"name": ..., "units": {...}, "columns": {"t": [...], ...}}`
//! with parallel numeric arrays. Units are optional, but when declared they
//! must be the SI units above.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::calculus::{first_derivative, second_derivative};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const COLUMNS: [&str; 5] = ["t", "q_l", "dq_l", "ddq_l", "tau_l"];
const REQUIRED: [&str; 3] = ["t", "q_l", "tau_l"];

fn si_unit(column: &str) -> &'static str {
    match column {
        "t" => "s",
        "q_l" => "rad",
        "dq_l" => "rad/s",
        "ddq_l" => "rad/s^2",
        "tau_l" => "N*m",
        _ => "",
    }
}

fn normalize_unit(unit: &str) -> String {
    unit.trim()
        .replace(['·', '⋅', ' '], "*")
        .replace('²', "^2")
        .replace("s2", "s^2")
        .replace("Nm", "N*m")
}

fn check_unit(column: &str, declared: &str) -> Result<()> {
    let expected = si_unit(column);
    if expected.is_empty() {
        return Err(Error::malformed(None, format!("units declared for unknown column {column}")));
    }
    if normalize_unit(declared) != expected {
        return Err(Error::UnitMismatch {
            column: column.to_string(),
            expected: expected.to_string(),
            found: declared.trim().to_string(),
        });
    }
    Ok(())
}

/// Input encoding for [`load_task`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskFormat {
    Csv,
    Json,
}

impl std::str::FromStr for TaskFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TaskFormat::Csv),
            "json" => Ok(TaskFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown task format {other}"))),
        }
    }
}

/// Time-sampled load kinematics and kinetics for one actuation task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskTrajectory<T> {
    pub name: String,
    /// Strictly increasing sample times (s).
    pub t: Vec<T>,
    /// Load position (rad).
    pub q_l: Vec<T>,
    /// Load velocity (rad/s); `None` until supplied or differentiated.
    pub dq_l: Option<Vec<T>>,
    /// Load acceleration (rad/s²).
    pub ddq_l: Option<Vec<T>>,
    /// Load effort (N·m).
    pub tau_l: Vec<T>,
}

impl<T: Scalar> TaskTrajectory<T> {
    /// Builds a trajectory and checks every invariant.
    pub fn new(
        name: impl Into<String>,
        t: Vec<T>,
        q_l: Vec<T>,
        dq_l: Option<Vec<T>>,
        ddq_l: Option<Vec<T>>,
        tau_l: Vec<T>,
    ) -> Result<Self> {
        let task = TaskTrajectory {
            name: name.into(),
            t,
            q_l,
            dq_l,
            ddq_l,
            tau_l,
        };
        task.validate()?;
        Ok(task)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn duration(&self) -> T {
        match (self.t.first(), self.t.last()) {
            (Some(&a), Some(&b)) => b - a,
            _ => T::zero(),
        }
    }

    pub fn has_derivatives(&self) -> bool {
        self.dq_l.is_some() && self.ddq_l.is_some()
    }

    /// Velocity and acceleration, or [`Error::MissingDerivatives`].
    pub fn derivatives(&self) -> Result<(&[T], &[T])> {
        match (&self.dq_l, &self.ddq_l) {
            (Some(v), Some(a)) => Ok((v, a)),
            _ => Err(Error::MissingDerivatives(self.name.clone())),
        }
    }

    fn columns(&self) -> Vec<(&'static str, &[T])> {
        let mut cols: Vec<(&'static str, &[T])> = vec![("t", &self.t), ("q_l", &self.q_l)];
        if let Some(v) = &self.dq_l {
            cols.push(("dq_l", v));
        }
        if let Some(a) = &self.ddq_l {
            cols.push(("ddq_l", a));
        }
        cols.push(("tau_l", &self.tau_l));
        cols
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        for (name, col) in self.columns() {
            if col.len() != n {
                return Err(Error::LengthMismatch {
                    column: name.to_string(),
                    expected: n,
                    found: col.len(),
                });
            }
        }
        // Report the earliest offending row across all columns.
        for row in 0..n {
            for (name, col) in self.columns() {
                if !col[row].is_finite() {
                    return Err(Error::NonFinite {
                        column: name.to_string(),
                        row: row + 1,
                    });
                }
            }
            if row > 0 && self.t[row] <= self.t[row - 1] {
                return Err(Error::NonMonotoneTime { row: row + 1 });
            }
        }
        if n < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: n });
        }
        Ok(())
    }

    /// CSV text with a units comment and the canonical header.
    pub fn to_csv(&self) -> String {
        let cols = self.columns();
        let mut out = String::new();
        out.push_str(&format!("# name: {}\n", self.name));
        let units: Vec<String> = cols
            .iter()
            .map(|(name, _)| format!("{name}={}", si_unit(name)))
            .collect();
        out.push_str(&format!("# units: {}\n", units.join(", ")));
        let header: Vec<&str> = cols.iter().map(|(name, _)| *name).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in 0..self.len() {
            let fields: Vec<String> = cols.iter().map(|(_, col)| format!("{:?}", col[row])).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// JSON object `{name, units, columns}`.
    pub fn to_json(&self) -> String {
        let doc = self.to_document();
        serde_json::to_string_pretty(&doc).expect("task serialization cannot fail")
    }

    pub fn to_document(&self) -> TaskDocument {
        let mut columns = BTreeMap::new();
        let mut units = BTreeMap::new();
        for (name, col) in self.columns() {
            columns.insert(
                name.to_string(),
                col.iter()
                    .map(|v| serde_json::Value::from(v.to_f64().unwrap_or(f64::NAN)))
                    .collect(),
            );
            units.insert(name.to_string(), si_unit(name).to_string());
        }
        TaskDocument {
            name: Some(self.name.clone()),
            units,
            columns,
        }
    }

    pub fn from_document(doc: TaskDocument, default_name: &str) -> Result<Self> {
        for (column, unit) in &doc.units {
            check_unit(column, unit)?;
        }
        for key in doc.columns.keys() {
            if !COLUMNS.contains(&key.as_str()) {
                return Err(Error::malformed(None, format!("unknown column {key}")));
            }
        }
        for required in REQUIRED {
            if !doc.columns.contains_key(required) {
                return Err(Error::MissingColumn(required.to_string()));
            }
        }
        let convert = |name: &str| -> Result<Option<Vec<T>>> {
            let Some(values) = doc.columns.get(name) else {
                return Ok(None);
            };
            values
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let x = v.as_f64().ok_or_else(|| {
                        Error::malformed(Some(i + 1), format!("column {name} holds non-numeric value {v}"))
                    })?;
                    T::from_f64(x).ok_or_else(|| Error::NonFinite {
                        column: name.to_string(),
                        row: i + 1,
                    })
                })
                .collect::<Result<Vec<T>>>()
                .map(Some)
        };
        let name = doc.name.clone().unwrap_or_else(|| default_name.to_string());
        TaskTrajectory::new(
            name,
            convert("t")?.unwrap_or_default(),
            convert("q_l")?.unwrap_or_default(),
            convert("dq_l")?,
            convert("ddq_l")?,
            convert("tau_l")?.unwrap_or_default(),
        )
    }

    fn from_csv_text(text: &str, default_name: &str) -> Result<Self> {
        let mut name = default_name.to_string();
        for line in text.lines() {
            let line = line.trim();
            let Some(comment) = line.strip_prefix('#') else {
                continue;
            };
            let comment = comment.trim();
            if let Some(value) = comment.strip_prefix("name:") {
                name = value.trim().to_string();
            } else if let Some(value) = comment.strip_prefix("units:") {
                for pair in value.split(',').filter(|p| !p.trim().is_empty()) {
                    let (column, unit) = pair.split_once('=').ok_or_else(|| {
                        Error::malformed(None, format!("bad units entry '{}'", pair.trim()))
                    })?;
                    check_unit(column.trim(), unit)?;
                }
            }
        }

        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::malformed(None, e.to_string()))?
            .clone();
        let mut index = BTreeMap::new();
        for (i, h) in headers.iter().enumerate() {
            if !COLUMNS.contains(&h) {
                return Err(Error::malformed(None, format!("unknown column {h}")));
            }
            if index.insert(h.to_string(), i).is_some() {
                return Err(Error::malformed(None, format!("duplicate column {h}")));
            }
        }
        for required in REQUIRED {
            if !index.contains_key(required) {
                return Err(Error::MissingColumn(required.to_string()));
            }
        }
        let mut data: BTreeMap<String, Vec<T>> = index.keys().map(|k| (k.clone(), Vec::new())).collect();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::malformed(Some(row + 1), e.to_string()))?;
            for (column, &i) in &index {
                let field = record.get(i).unwrap_or("");
                let value: T = field.parse().map_err(|_| {
                    Error::malformed(Some(row + 1), format!("column {column}: cannot parse '{field}'"))
                })?;
                data.get_mut(column).expect("column exists").push(value);
            }
        }
        TaskTrajectory::new(
            name,
            data.remove("t").unwrap_or_default(),
            data.remove("q_l").unwrap_or_default(),
            data.remove("dq_l"),
            data.remove("ddq_l"),
            data.remove("tau_l").unwrap_or_default(),
        )
    }
}

/// JSON wire form of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub units: BTreeMap<String, String>,
    pub columns: BTreeMap<String, Vec<serde_json::Value>>,
}

/// Decodes and validates a trajectory. `default_name` is used when the
/// source does not name the task.
pub fn load_task<T: Scalar, R: Read>(mut source: R, format: TaskFormat, default_name: &str) -> Result<TaskTrajectory<T>> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| Error::malformed(None, e.to_string()))?;
    parse_task(&text, format, default_name)
}

pub fn parse_task<T: Scalar>(text: &str, format: TaskFormat, default_name: &str) -> Result<TaskTrajectory<T>> {
    match format {
        TaskFormat::Csv => TaskTrajectory::from_csv_text(text, default_name),
        TaskFormat::Json => {
            let doc: TaskDocument = serde_json::from_str(text)
                .map_err(|e| Error::malformed(Some(e.line()), e.to_string()))?;
            TaskTrajectory::from_document(doc, default_name)
        }
    }
}

/// Fills missing velocity and acceleration columns. Supplied columns are
/// kept; acceleration is taken from a supplied velocity when available and
/// from the position otherwise.
pub fn differentiate<T: Scalar>(task: &TaskTrajectory<T>) -> Result<TaskTrajectory<T>> {
    if task.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: task.len(),
        });
    }
    let mut out = task.clone();
    if out.ddq_l.is_none() {
        out.ddq_l = Some(match &task.dq_l {
            Some(v) => first_derivative(&task.t, v),
            None => second_derivative(&task.t, &task.q_l),
        });
    }
    if out.dq_l.is_none() {
        out.dq_l = Some(first_derivative(&task.t, &task.q_l));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingMode {
    #[default]
    None,
    MassNormalized,
    MassAndHeightNormalized,
}

/// Converts body-normalized torques to absolute torques.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingSpec<T> {
    pub body_mass: T,
    pub body_height: T,
    pub mode: ScalingMode,
}

impl<T: Scalar> ScalingSpec<T> {
    pub fn new(body_mass: T, body_height: T, mode: ScalingMode) -> Result<Self> {
        let spec = ScalingSpec {
            body_mass,
            body_height,
            mode,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.body_mass > T::zero()) || !self.body_mass.is_finite() {
            return Err(Error::invalid("body_mass", "must be positive"));
        }
        if !(self.body_height > T::zero()) || !self.body_height.is_finite() {
            return Err(Error::invalid("body_height", "must be positive"));
        }
        Ok(())
    }

    pub fn factor(&self) -> T {
        match self.mode {
            ScalingMode::None => T::one(),
            ScalingMode::MassNormalized => self.body_mass,
            ScalingMode::MassAndHeightNormalized => self.body_mass * self.body_height,
        }
    }
}

pub fn scale_task<T: Scalar>(task: &TaskTrajectory<T>, spec: &ScalingSpec<T>) -> Result<TaskTrajectory<T>> {
    spec.validate()?;
    let mut out = task.clone();
    if spec.mode != ScalingMode::None {
        let k = spec.factor();
        out.tau_l.iter_mut().for_each(|v| *v = *v * k);
    }
    Ok(out)
}
