//! Source effort as an affine function of the spring design `x = (k_p, τ_p)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Vec2};
use crate::scalar::{sign, Scalar};
use crate::trajectory::TaskTrajectory;

/// Parallel spring stiffness (N·m/rad) and preload (N·m). Serialized as
/// `[k_p, tau_p]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[T; 2]", into = "[T; 2]")]
pub struct DesignPoint<T: Copy> {
    pub k_p: T,
    pub tau_p: T,
}

impl<T: Scalar> DesignPoint<T> {
    pub fn new(k_p: T, tau_p: T) -> Self {
        DesignPoint { k_p, tau_p }
    }

    pub fn origin() -> Self {
        DesignPoint::new(T::zero(), T::zero())
    }

    pub fn as_vec(&self) -> Vec2<T> {
        [self.k_p, self.tau_p]
    }

    pub fn is_finite(&self) -> bool {
        self.k_p.is_finite() && self.tau_p.is_finite()
    }

    /// Spring effort at load position `q`: `−k_p q + τ_p`.
    pub fn spring_effort(&self, q: T) -> T {
        -self.k_p * q + self.tau_p
    }
}

impl<T: Copy> From<[T; 2]> for DesignPoint<T> {
    fn from(v: [T; 2]) -> Self {
        DesignPoint { k_p: v[0], tau_p: v[1] }
    }
}

impl<T: Copy> From<DesignPoint<T>> for [T; 2] {
    fn from(x: DesignPoint<T>) -> Self {
        [x.k_p, x.tau_p]
    }
}

/// Electric motor and transmission constants, SI units throughout.
///
/// `eta` is the lumped viscous coefficient (sometimes tabulated as `b_m`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotorParams<T> {
    /// Motor constant (N·m/√W).
    pub k_m: T,
    /// Torque constant (N·m/A).
    pub k_t: T,
    /// Voltage constant (V·s/rad).
    pub k_v: T,
    /// Gear ratio.
    pub r: T,
    /// Rotor plus transmission inertia (kg·m²).
    #[serde(rename = "J_m")]
    pub j_m: T,
    pub eta: T,
    /// Coulomb friction (N·m).
    pub mu: T,
    /// Winding resistance (Ω).
    #[serde(rename = "R_m")]
    pub r_m: T,
    /// Supply voltage (V).
    pub v_s: T,
    pub i_cont: T,
    pub i_max: T,
    /// Constant unmodeled torque (N·m).
    #[serde(default)]
    pub tau_u: T,
}

impl<T: Scalar> MotorParams<T> {
    /// The ActPack 4.1 ankle motor.
    pub fn actpack41() -> Self {
        MotorParams {
            k_m: T::lit(0.0916),
            k_t: T::lit(0.0514),
            k_v: T::lit(0.0514),
            r: T::lit(9.0),
            j_m: T::lit(1.2e-4),
            eta: T::lit(0.16e-3),
            mu: T::lit(0.0324),
            r_m: T::lit(0.315),
            v_s: T::lit(48.0),
            i_cont: T::lit(8.0),
            i_max: T::lit(22.0),
            tau_u: T::zero(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let params: Self = serde_json::from_str(text).map_err(|e| Error::malformed(Some(e.line()), e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("k_m", self.k_m),
            ("k_t", self.k_t),
            ("k_v", self.k_v),
            ("r", self.r),
            ("J_m", self.j_m),
            ("eta", self.eta),
            ("mu", self.mu),
            ("R_m", self.r_m),
            ("v_s", self.v_s),
            ("i_cont", self.i_cont),
            ("i_max", self.i_max),
            ("tau_u", self.tau_u),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        for (name, v) in [("r", self.r), ("k_m", self.k_m), ("k_t", self.k_t), ("R_m", self.r_m), ("v_s", self.v_s)] {
            if v <= T::zero() {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        for (name, v) in [("J_m", self.j_m), ("eta", self.eta), ("mu", self.mu)] {
            if v < T::zero() {
                return Err(Error::invalid(name, "must be nonnegative"));
            }
        }
        if self.i_cont <= T::zero() {
            return Err(Error::invalid("i_cont", "must be positive"));
        }
        if self.i_max < self.i_cont {
            return Err(Error::invalid("i_max", "must be at least i_cont"));
        }
        let implied = self.k_t / self.r_m.sqrt();
        if ((self.k_m - implied) / implied).abs() > T::lit(0.02) {
            return Err(Error::invalid(
                "k_m",
                format!("inconsistent with k_t/sqrt(R_m) = {implied}"),
            ));
        }
        Ok(())
    }

    /// Peak electromagnetic torque allowed by the driver, `k_t · i_max`.
    pub fn tau_max(&self) -> T {
        self.k_t * self.i_max
    }

    /// Rated continuous torque, `k_t · i_cont`.
    pub fn tau_cont(&self) -> T {
        self.k_t * self.i_cont
    }

    /// Torque–speed line: largest torque available at motor speed `dq_m`.
    pub fn torque_speed_limit(&self, dq_m: T) -> T {
        self.k_t / self.r_m * self.v_s - self.k_t * self.k_t / self.r_m * dq_m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Generic,
    Motor,
}

/// Per-sample affine map `τ_i = a_i · x + b_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineEffort<T> {
    pub task_name: String,
    pub t: Vec<T>,
    pub a: Vec<Vec2<T>>,
    pub b: Vec<T>,
    pub source_kind: SourceKind,
    pub r_used: T,
    /// Motor-side speed `r · q̇_l`, present for motor sources.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dq_m: Option<Vec<T>>,
}

impl<T: Scalar> AffineEffort<T> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn effort_at(&self, i: usize, x: &DesignPoint<T>) -> T {
        dot(&self.a[i], &x.as_vec()) + self.b[i]
    }

    pub fn effort(&self, x: &DesignPoint<T>) -> Vec<T> {
        (0..self.len()).map(|i| self.effort_at(i, x)).collect()
    }
}

/// Generic effort source: `a = (q_l, −1)`, `b = −τ_l`.
pub fn effort_affine_generic<T: Scalar>(task: &TaskTrajectory<T>) -> AffineEffort<T> {
    AffineEffort {
        task_name: task.name.clone(),
        t: task.t.clone(),
        a: task.q_l.iter().map(|&q| [q, -T::one()]).collect(),
        b: task.tau_l.iter().map(|&tau| -tau).collect(),
        source_kind: SourceKind::Generic,
        r_used: T::one(),
        dq_m: None,
    }
}

/// Geared motor source: `a = (q_l, −1)/r` and
/// `b = J_m r q̈_l + η r q̇_l + μ sign(r q̇_l) − τ_l/r + τ_u`.
pub fn effort_affine_motor<T: Scalar>(task: &TaskTrajectory<T>, motor: &MotorParams<T>) -> Result<AffineEffort<T>> {
    effort_affine_motor_with_unmodeled(task, motor, None)
}

/// As [`effort_affine_motor`], adding a per-sample unmodeled torque trace on
/// top of the constant `motor.tau_u`.
pub fn effort_affine_motor_with_unmodeled<T: Scalar>(
    task: &TaskTrajectory<T>,
    motor: &MotorParams<T>,
    unmodeled: Option<&[T]>,
) -> Result<AffineEffort<T>> {
    let (dq, ddq) = task.derivatives()?;
    if let Some(trace) = unmodeled {
        if trace.len() != task.len() {
            return Err(Error::LengthMismatch {
                column: "tau_u".into(),
                expected: task.len(),
                found: trace.len(),
            });
        }
    }
    let r = motor.r;
    let n = task.len();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut dq_m = Vec::with_capacity(n);
    for i in 0..n {
        let speed = r * dq[i];
        let accel = r * ddq[i];
        let extra = unmodeled.map_or(T::zero(), |u| u[i]);
        a.push([task.q_l[i] / r, -T::one() / r]);
        b.push(motor.j_m * accel + motor.eta * speed + motor.mu * sign(speed) - task.tau_l[i] / r + motor.tau_u + extra);
        dq_m.push(speed);
    }
    Ok(AffineEffort {
        task_name: task.name.clone(),
        t: task.t.clone(),
        a,
        b,
        source_kind: SourceKind::Motor,
        r_used: r,
        dq_m: Some(dq_m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(q: &[f64], dq: &[f64], ddq: &[f64], tau: &[f64]) -> TaskTrajectory<f64> {
        let t: Vec<f64> = (0..q.len()).map(|i| i as f64).collect();
        TaskTrajectory::new("s", t, q.to_vec(), Some(dq.to_vec()), Some(ddq.to_vec()), tau.to_vec()).unwrap()
    }

    #[test]
    fn generic_substitution() {
        let aff = effort_affine_generic(&task(&[2.0, 0.0], &[0.0; 2], &[0.0; 2], &[3.0, 0.0]));
        assert_eq!(aff.a[0], [2.0, -1.0]);
        assert_eq!(aff.b[0], -3.0);
        assert_eq!(aff.a[1], [0.0, -1.0]);
        assert_eq!(aff.b[1], 0.0);
        assert_eq!(aff.effort_at(0, &DesignPoint::new(1.0, 1.0)), -2.0);
    }

    #[test]
    fn static_motor_sample() {
        let mut motor = MotorParams::<f64>::actpack41();
        motor.tau_u = 0.0;
        let aff = effort_affine_motor(&task(&[0.0, 0.0], &[0.0; 2], &[0.0; 2], &[4.0, 4.0]), &motor).unwrap();
        assert_eq!(aff.a[0], [0.0, -1.0 / 9.0]);
        assert_eq!(aff.b[0], -4.0 / 9.0);
    }

    #[test]
    fn unit_ratio_frictionless_motor_matches_generic() {
        let mut motor = MotorParams::<f64>::actpack41();
        motor.r = 1.0;
        motor.j_m = 0.0;
        motor.eta = 0.0;
        motor.mu = 0.0;
        let tk = task(&[0.3, -1.0, 2.0], &[1.0, -2.0, 0.5], &[3.0, 1.0, -1.0], &[1.0, 2.0, -3.0]);
        let m = effort_affine_motor(&tk, &motor).unwrap();
        let g = effort_affine_generic(&tk);
        assert_eq!(m.a, g.a);
        assert_eq!(m.b, g.b);
    }

    #[test]
    fn actpack_intercept_term_by_term() {
        // Hand evaluation: J_m r q̈ = 1.2e-4·9·2 = 2.16e-3; η r q̇ = 0.16e-3·9 = 1.44e-3;
        // μ sign(9) = 0.0324; −τ_l/r = −0.5/9.
        let motor = MotorParams::<f64>::actpack41();
        let tk = task(&[0.1, 0.1], &[1.0, 1.0], &[2.0, 2.0], &[0.5, 0.5]);
        let aff = effort_affine_motor(&tk, &motor).unwrap();
        let expected = 2.16e-3 + 1.44e-3 + 0.0324 - 0.5 / 9.0;
        assert!((aff.b[0] - expected).abs() < 1e-15);
        assert_eq!(aff.a[0], [0.1 / 9.0, -1.0 / 9.0]);
    }

    #[test]
    fn motor_requires_derivatives() {
        let tk = TaskTrajectory::new("n", vec![0.0, 1.0], vec![0.0, 0.0], None, None, vec![0.0, 0.0]).unwrap();
        assert_eq!(
            effort_affine_motor(&tk, &MotorParams::actpack41()).unwrap_err(),
            Error::MissingDerivatives("n".into())
        );
    }

    #[test]
    fn unmodeled_trace_adds_to_intercept() {
        let motor = MotorParams::<f64>::actpack41();
        let tk = task(&[0.0, 0.0], &[0.0; 2], &[0.0; 2], &[0.0, 0.0]);
        let aff = effort_affine_motor_with_unmodeled(&tk, &motor, Some(&[0.1, -0.2])).unwrap();
        assert_eq!(aff.b, vec![0.1, -0.2]);
        assert!(effort_affine_motor_with_unmodeled(&tk, &motor, Some(&[0.1])).is_err());
    }

    #[test]
    fn motor_params_json_and_validation() {
        let text = serde_json::to_string(&MotorParams::<f64>::actpack41()).unwrap();
        assert!(text.contains("\"J_m\"") && text.contains("\"R_m\""));
        let back = MotorParams::<f64>::from_json(&text).unwrap();
        assert_eq!(back, MotorParams::actpack41());
        assert!((back.tau_max() - 1.1308).abs() < 1e-12);

        let mut bad = MotorParams::<f64>::actpack41();
        bad.k_m = 0.2;
        assert!(bad.validate().is_err());
        let mut bad = MotorParams::<f64>::actpack41();
        bad.i_max = 1.0;
        assert!(bad.validate().is_err());
        assert!(MotorParams::<f64>::from_json(&text.replace("\"eta\"", "\"b_m\"")).is_err());
    }

    #[test]
    fn design_point_wire_form() {
        let x = DesignPoint::new(12.92, 0.21);
        assert_eq!(serde_json::to_string(&x).unwrap(), "[12.92,0.21]");
        let back: DesignPoint<f64> = serde_json::from_str("[1.0,-2.0]").unwrap();
        assert_eq!(back, DesignPoint::new(1.0, -2.0));
    }
}
