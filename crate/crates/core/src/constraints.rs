//! Linear motor feasibility rows `M x ≤ p`: peak torque on both sides and the
//! torque–speed line at every sample.

use serde::{Deserialize, Serialize};

use crate::actuator::{AffineEffort, DesignPoint, MotorParams, SourceKind};
use crate::error::{Error, Result};
use crate::linalg::{dot, Vec2};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowKind {
    /// `τ ≤ τ_max`
    #[serde(rename = "peak+")]
    PeakPositive,
    /// `−τ ≤ τ_max`
    #[serde(rename = "peak-")]
    PeakNegative,
    /// `τ ≤ (k_t/R_m) v_s − (k_t²/R_m) q̇_m`
    #[serde(rename = "speed")]
    Speed,
    #[serde(rename = "continuous+")]
    ContinuousPositive,
    #[serde(rename = "continuous-")]
    ContinuousNegative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowTag {
    pub kind: RowKind,
    pub sample: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
}

mod flat_rows {
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<T: Serialize + Copy, S: Serializer>(rows: &[[T; 2]], s: S) -> Result<S::Ok, S::Error> {
        let flat: Vec<T> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        flat.serialize(s)
    }

    pub fn deserialize<'de, T: Deserialize<'de> + Copy, D: Deserializer<'de>>(d: D) -> Result<Vec<[T; 2]>, D::Error> {
        let flat = Vec::<T>::deserialize(d)?;
        if flat.len() % 2 != 0 {
            return Err(D::Error::custom("M must hold an even number of entries"));
        }
        Ok(flat.chunks(2).map(|c| [c[0], c[1]]).collect())
    }
}

/// Rows of `M x ≤ p`; `M` is serialized row-major as `2n` numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(bound(serialize = "T: Serialize + Copy", deserialize = "T: Deserialize<'de> + Copy"))]
pub struct LinearConstraints<T> {
    #[serde(rename = "M", with = "flat_rows")]
    pub m: Vec<Vec2<T>>,
    pub p: Vec<T>,
    #[serde(default)]
    pub row_tags: Vec<RowTag>,
}

impl<T: Scalar> LinearConstraints<T> {
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.m.len() != self.p.len() {
            return Err(Error::LengthMismatch {
                column: "p".into(),
                expected: self.m.len(),
                found: self.p.len(),
            });
        }
        if !self.row_tags.is_empty() && self.row_tags.len() != self.p.len() {
            return Err(Error::LengthMismatch {
                column: "row_tags".into(),
                expected: self.p.len(),
                found: self.row_tags.len(),
            });
        }
        let finite = self.m.iter().all(|r| r[0].is_finite() && r[1].is_finite()) && self.p.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("M/p", "rows must be finite"));
        }
        Ok(())
    }

    /// `M_j · x − p_j` for every row; nonpositive means satisfied.
    pub fn residuals(&self, x: &DesignPoint<T>) -> Vec<T> {
        let v = x.as_vec();
        self.m.iter().zip(&self.p).map(|(row, &p)| dot(row, &v) - p).collect()
    }

    /// Indices of rows whose residual exceeds `tol`.
    pub fn violated(&self, x: &DesignPoint<T>, tol: T) -> Vec<usize> {
        self.residuals(x)
            .iter()
            .enumerate()
            .filter(|(_, r)| **r > tol)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_satisfied(&self, x: &DesignPoint<T>, tol: T) -> bool {
        self.residuals(x).iter().all(|r| *r <= tol)
    }

    /// Stacks the rows of several constraint sets.
    pub fn concat(sets: &[LinearConstraints<T>]) -> Self {
        let mut out = LinearConstraints::default();
        for set in sets {
            out.m.extend_from_slice(&set.m);
            out.p.extend_from_slice(&set.p);
            out.row_tags.extend(set.row_tags.iter().cloned());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeasibilityOptions<T> {
    /// Peak torque limit; defaults to `k_t · i_max`.
    #[serde(default)]
    pub tau_max: Option<T>,
    /// Also bound `|τ| ≤ k_t · i_cont` at every sample.
    #[serde(default)]
    pub continuous_rows: bool,
}

pub fn feasibility_constraints<T: Scalar>(affine: &AffineEffort<T>, motor: &MotorParams<T>) -> Result<LinearConstraints<T>> {
    feasibility_constraints_with(affine, motor, &FeasibilityOptions::default())
}

pub fn feasibility_constraints_with<T: Scalar>(
    affine: &AffineEffort<T>,
    motor: &MotorParams<T>,
    options: &FeasibilityOptions<T>,
) -> Result<LinearConstraints<T>> {
    let speeds = match (&affine.source_kind, &affine.dq_m) {
        (SourceKind::Motor, Some(s)) => s,
        _ => {
            return Err(Error::KindMismatch {
                expected: "motor".into(),
                found: "generic".into(),
            })
        }
    };
    let tau_max = options.tau_max.unwrap_or_else(|| motor.tau_max());
    let tau_cont = motor.tau_cont();
    let rows_per_sample = if options.continuous_rows { 5 } else { 3 };
    let n = affine.len();
    let mut out = LinearConstraints {
        m: Vec::with_capacity(rows_per_sample * n),
        p: Vec::with_capacity(rows_per_sample * n),
        row_tags: Vec::with_capacity(rows_per_sample * n),
    };
    let task = Some(affine.task_name.clone());
    let mut push = |row: Vec2<T>, rhs: T, kind: RowKind, sample: usize| {
        out.m.push(row);
        out.p.push(rhs);
        out.row_tags.push(RowTag {
            kind,
            sample,
            task: task.clone(),
        });
    };
    for i in 0..n {
        let a = affine.a[i];
        let b = affine.b[i];
        let neg = [-a[0], -a[1]];
        push(a, tau_max - b, RowKind::PeakPositive, i);
        push(neg, tau_max + b, RowKind::PeakNegative, i);
        push(a, motor.torque_speed_limit(speeds[i]) - b, RowKind::Speed, i);
        if options.continuous_rows {
            push(a, tau_cont - b, RowKind::ContinuousPositive, i);
            push(neg, tau_cont + b, RowKind::ContinuousNegative, i);
        }
    }
    Ok(out)
}
