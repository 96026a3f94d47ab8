//! Per-task metrics of a chosen design and the spiral spring geometry helper.

use serde::{Deserialize, Serialize};

use crate::actuator::{effort_affine_generic, effort_affine_motor, DesignPoint, MotorParams, SourceKind};
use crate::calculus::IntegrationRule;
use crate::constraints::{feasibility_constraints_with, FeasibilityOptions, RowTag};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trajectory::TaskTrajectory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMetrics<T> {
    pub task_name: String,
    pub source_kind: SourceKind,
    /// `√(∫τ² dt / (t_f − t₀))`.
    pub rms_effort: T,
    /// `∫τ² dt`, the value the RMS objective quadratic evaluates to.
    pub integrated_square: T,
    pub energy_per_stride: Option<T>,
    pub joule_energy: Option<T>,
    pub mechanical_energy: Option<T>,
    /// The ideal-regeneration model produced a net energy below zero.
    pub negative_energy: bool,
    pub peak_torque: T,
    /// Feasibility against the motor rows; always true for generic sources.
    pub feasible: bool,
    pub violated_rows: Vec<RowTag>,
    pub torque_trace: Vec<T>,
    pub spring_trace: Vec<T>,
}

pub fn evaluate_design<T: Scalar>(
    x: &DesignPoint<T>,
    task: &TaskTrajectory<T>,
    motor: Option<&MotorParams<T>>,
) -> Result<TaskMetrics<T>> {
    evaluate_design_with(x, task, motor, &FeasibilityOptions::default())
}

pub fn evaluate_design_with<T: Scalar>(
    x: &DesignPoint<T>,
    task: &TaskTrajectory<T>,
    motor: Option<&MotorParams<T>>,
    feasibility: &FeasibilityOptions<T>,
) -> Result<TaskMetrics<T>> {
    task.validate()?;
    if !x.is_finite() {
        return Err(Error::invalid("x", "design point must be finite"));
    }
    let rule = IntegrationRule::Trapezoid;
    let t = &task.t;
    let affine = match motor {
        Some(m) => effort_affine_motor(task, m)?,
        None => effort_affine_generic(task),
    };
    let torque = affine.effort(x);
    let spring: Vec<T> = task.q_l.iter().map(|&q| x.spring_effort(q)).collect();
    let integrated_square = rule.integrate(t, |i| torque[i] * torque[i]);
    let duration = task.duration();
    let rms_effort = if duration > T::zero() {
        (integrated_square / duration).max(T::zero()).sqrt()
    } else {
        T::zero()
    };
    let peak_torque = torque.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));

    let mut metrics = TaskMetrics {
        task_name: task.name.clone(),
        source_kind: affine.source_kind,
        rms_effort,
        integrated_square,
        energy_per_stride: None,
        joule_energy: None,
        mechanical_energy: None,
        negative_energy: false,
        peak_torque,
        feasible: true,
        violated_rows: Vec::new(),
        torque_trace: torque,
        spring_trace: spring,
    };

    if let Some(m) = motor {
        let (dq, _) = task.derivatives()?;
        let km2 = m.k_m * m.k_m;
        let tau = &metrics.torque_trace;
        let joule = rule.integrate(t, |i| tau[i] * tau[i] / km2);
        let mechanical = rule.integrate(t, |i| tau[i] * (m.r * dq[i]));
        let total = joule + mechanical;
        metrics.joule_energy = Some(joule);
        metrics.mechanical_energy = Some(mechanical);
        metrics.energy_per_stride = Some(total);
        metrics.negative_energy = total < T::zero();

        let rows = feasibility_constraints_with(&affine, m, feasibility)?;
        let violated = rows.violated(x, T::zero());
        metrics.feasible = violated.is_empty();
        metrics.violated_rows = violated.iter().map(|&j| rows.row_tags[j].clone()).collect();
    }
    Ok(metrics)
}

/// One row of a design comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow<T> {
    pub design: String,
    pub task: String,
    pub k_p: T,
    pub tau_p: T,
    pub rms_effort: T,
    pub rms_change_pct: T,
    pub peak_torque: T,
    pub energy_per_stride: Option<T>,
    pub joule_energy: Option<T>,
    pub mechanical_energy: Option<T>,
    pub energy_change_pct: Option<T>,
    pub feasible: bool,
    pub negative_energy: bool,
}

pub const COMPARISON_COLUMNS: [&str; 13] = [
    "design",
    "task",
    "k_p",
    "tau_p",
    "rms_effort",
    "rms_change_pct",
    "peak_torque",
    "energy_per_stride",
    "joule_energy",
    "mechanical_energy",
    "energy_change_pct",
    "feasible",
    "negative_energy",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable<T> {
    pub rows: Vec<ComparisonRow<T>>,
}

fn percent_change<T: Scalar>(value: T, baseline: T) -> T {
    if baseline == T::zero() {
        if value == T::zero() {
            T::zero()
        } else {
            T::nan()
        }
    } else {
        T::lit(100.0) * (value - baseline) / baseline.abs()
    }
}

/// Cross product of designs and tasks, with percentage change against the
/// spring-free baseline of the same task.
pub fn compare_designs<T: Scalar>(
    designs: &[(String, DesignPoint<T>)],
    tasks: &[TaskTrajectory<T>],
    motor: Option<&MotorParams<T>>,
) -> Result<ComparisonTable<T>> {
    if designs.is_empty() || tasks.is_empty() {
        return Err(Error::InvalidArgument("compare_designs needs at least one design and one task".into()));
    }
    let mut rows = Vec::with_capacity(designs.len() * tasks.len());
    let baselines: Vec<TaskMetrics<T>> = tasks
        .iter()
        .map(|task| evaluate_design(&DesignPoint::origin(), task, motor))
        .collect::<Result<_>>()?;
    for (name, x) in designs {
        for (task, base) in tasks.iter().zip(&baselines) {
            let m = evaluate_design(x, task, motor)?;
            let energy_change_pct = match (m.energy_per_stride, base.energy_per_stride) {
                (Some(e), Some(e0)) => Some(percent_change(e, e0)),
                _ => None,
            };
            rows.push(ComparisonRow {
                design: name.clone(),
                task: task.name.clone(),
                k_p: x.k_p,
                tau_p: x.tau_p,
                rms_effort: m.rms_effort,
                rms_change_pct: percent_change(m.rms_effort, base.rms_effort),
                peak_torque: m.peak_torque,
                energy_per_stride: m.energy_per_stride,
                joule_energy: m.joule_energy,
                mechanical_energy: m.mechanical_energy,
                energy_change_pct,
                feasible: m.feasible,
                negative_energy: m.negative_energy,
            });
        }
    }
    Ok(ComparisonTable { rows })
}

impl<T: Scalar> ComparisonTable<T> {
    pub fn to_csv(&self) -> String {
        let mut out = COMPARISON_COLUMNS.join(",");
        out.push('\n');
        let opt = |v: Option<T>| v.map(|v| format!("{v:?}")).unwrap_or_default();
        for r in &self.rows {
            let fields = [
                quote(&r.design),
                quote(&r.task),
                format!("{:?}", r.k_p),
                format!("{:?}", r.tau_p),
                format!("{:?}", r.rms_effort),
                format!("{:?}", r.rms_change_pct),
                format!("{:?}", r.peak_torque),
                opt(r.energy_per_stride),
                opt(r.joule_energy),
                opt(r.mechanical_energy),
                opt(r.energy_change_pct),
                r.feasible.to_string(),
                r.negative_energy.to_string(),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rows).expect("comparison rows serialize")
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Rectangular-section spiral spring: Young's modulus `E` (Pa), strip width
/// `b`, thickness `h` and active length `L` (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpringGeometry<T> {
    #[serde(rename = "E")]
    pub e: T,
    pub b: T,
    pub h: T,
    #[serde(rename = "L")]
    pub l: T,
}

impl<T: Scalar> SpringGeometry<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("E", self.e), ("b", self.b), ("h", self.h), ("L", self.l)] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        Ok(())
    }
}

/// `k = E b h³ / (12 L)` in N·m/rad.
pub fn spiral_spring_stiffness<T: Scalar>(geom: &SpringGeometry<T>) -> Result<T> {
    geom.validate()?;
    Ok(geom.e * geom.b * geom.h.powi(3) / (T::lit(12.0) * geom.l))
}

/// Thickness giving stiffness `k` with the other dimensions of `geom` fixed.
pub fn spiral_spring_thickness<T: Scalar>(geom: &SpringGeometry<T>, k: T) -> Result<T> {
    if !(k.is_finite() && k > T::zero()) {
        return Err(Error::invalid("k", "must be positive"));
    }
    let probe = SpringGeometry { h: T::one(), ..*geom };
    probe.validate()?;
    Ok((T::lit(12.0) * k * geom.l / (geom.e * geom.b)).cbrt())
}
