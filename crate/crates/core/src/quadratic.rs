//! Convex quadratic costs `f(x) = xᵀQx + 2qᵀx + c` of the spring design and
//! their multi-task combinations.

use serde::{Deserialize, Serialize};

use crate::actuator::{AffineEffort, DesignPoint, MotorParams, SourceKind};
use crate::calculus::IntegrationRule;
use crate::error::{Error, Result};
use crate::linalg::{dot, frobenius, quad_form, Mat2, SymEigen, Vec2};
use crate::scalar::Scalar;
use crate::trajectory::TaskTrajectory;

/// Absolute floor on the smallest eigenvalue accepted as positive
/// semidefinite, scaled by `max(1, ‖Q‖_F)`.
pub const PSD_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    RmsEffort,
    MotorEnergy,
}

impl ObjectiveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveKind::RmsEffort => "rms-effort",
            ObjectiveKind::MotorEnergy => "motor-energy",
        }
    }
}

impl std::str::FromStr for ObjectiveKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rms-effort" => Ok(ObjectiveKind::RmsEffort),
            "motor-energy" => Ok(ObjectiveKind::MotorEnergy),
            other => Err(Error::InvalidArgument(format!("unknown objective kind {other}"))),
        }
    }
}

pub(crate) mod row_major {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<T: Serialize + Copy, S: Serializer>(m: &[[T; 2]; 2], s: S) -> Result<S::Ok, S::Error> {
        [m[0][0], m[0][1], m[1][0], m[1][1]].serialize(s)
    }

    pub fn deserialize<'de, T: Deserialize<'de> + Copy, D: Deserializer<'de>>(d: D) -> Result<[[T; 2]; 2], D::Error> {
        let v = <[T; 4]>::deserialize(d)?;
        Ok([[v[0], v[1]], [v[2], v[3]]])
    }
}

/// Quadratic cost of one task (or of a weighted combination of tasks).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize + Copy", deserialize = "T: Deserialize<'de> + Copy"))]
pub struct QuadraticObjective<T> {
    #[serde(rename = "Q", with = "row_major")]
    pub matrix: Mat2<T>,
    #[serde(rename = "q")]
    pub vector: Vec2<T>,
    #[serde(rename = "c")]
    pub constant: T,
    pub kind: ObjectiveKind,
    pub task_name: String,
    #[serde(default)]
    pub integration: IntegrationRule,
}

impl<T: Scalar> QuadraticObjective<T> {
    /// `xᵀQx + 2qᵀx`, the change in cost relative to the no-spring design.
    pub fn excess(&self, x: &DesignPoint<T>) -> T {
        let v = x.as_vec();
        quad_form(&self.matrix, &v) + T::lit(2.0) * dot(&self.vector, &v)
    }

    pub fn evaluate(&self, x: &DesignPoint<T>) -> T {
        self.constant + self.excess(x)
    }

    pub fn gradient(&self, x: &DesignPoint<T>) -> Vec2<T> {
        let v = x.as_vec();
        let two = T::lit(2.0);
        [
            two * (self.matrix[0][0] * v[0] + self.matrix[0][1] * v[1] + self.vector[0]),
            two * (self.matrix[1][0] * v[0] + self.matrix[1][1] * v[1] + self.vector[1]),
        ]
    }

    pub fn min_eigenvalue(&self) -> T {
        SymEigen::new(&self.matrix).values[0]
    }

    /// Symmetry, finiteness and positive semidefiniteness.
    pub fn validate(&self) -> Result<()> {
        let entries = [
            self.matrix[0][0],
            self.matrix[0][1],
            self.matrix[1][0],
            self.matrix[1][1],
            self.vector[0],
            self.vector[1],
            self.constant,
        ];
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("objective", format!("{}: non-finite coefficient", self.task_name)));
        }
        let scale = T::one().max(frobenius(&self.matrix));
        let tol = T::lit(PSD_TOLERANCE) * scale;
        if (self.matrix[0][1] - self.matrix[1][0]).abs() > T::epsilon() * scale * T::lit(4.0) {
            return Err(Error::invalid("Q", format!("{}: not symmetric", self.task_name)));
        }
        if self.min_eigenvalue() < -tol {
            return Err(Error::invalid(
                "Q",
                format!("{}: not positive semidefinite", self.task_name),
            ));
        }
        Ok(())
    }
}

fn symmetric<T: Scalar>(xx: T, xy: T, yy: T) -> Mat2<T> {
    [[xx, xy], [xy, yy]]
}

/// Integrated square of the affine effort: `Q = ∫aaᵀ`, `q = ∫ab`, `c = ∫b²`.
pub fn rms_quadratic<T: Scalar>(affine: &AffineEffort<T>) -> Result<QuadraticObjective<T>> {
    check_affine(affine)?;
    let rule = IntegrationRule::Trapezoid;
    let (t, a, b) = (&affine.t, &affine.a, &affine.b);
    let q00 = rule.integrate(t, |i| a[i][0] * a[i][0]);
    let q01 = rule.integrate(t, |i| a[i][0] * a[i][1]);
    let q11 = rule.integrate(t, |i| a[i][1] * a[i][1]);
    let q0 = rule.integrate(t, |i| a[i][0] * b[i]);
    let q1 = rule.integrate(t, |i| a[i][1] * b[i]);
    let c = rule.integrate(t, |i| b[i] * b[i]);
    Ok(QuadraticObjective {
        matrix: symmetric(q00, q01, q11),
        vector: [q0, q1],
        constant: c,
        kind: ObjectiveKind::RmsEffort,
        task_name: affine.task_name.clone(),
        integration: rule,
    })
}

/// Motor energy drawn from the supply (Joule heating plus rotor mechanical
/// work) as a quadratic of the design.
pub fn energy_quadratic<T: Scalar>(
    affine: &AffineEffort<T>,
    motor: &MotorParams<T>,
    task: &TaskTrajectory<T>,
) -> Result<QuadraticObjective<T>> {
    check_affine(affine)?;
    if affine.source_kind != SourceKind::Motor {
        return Err(Error::KindMismatch {
            expected: "motor".into(),
            found: "generic".into(),
        });
    }
    let (dq, _) = task.derivatives()?;
    if dq.len() != affine.len() {
        return Err(Error::LengthMismatch {
            column: "dq_l".into(),
            expected: affine.len(),
            found: dq.len(),
        });
    }
    let rule = IntegrationRule::Trapezoid;
    let (t, a, b) = (&affine.t, &affine.a, &affine.b);
    let km2 = motor.k_m * motor.k_m;
    let half = T::lit(0.5);
    let speed = |i: usize| dq[i] * motor.r;
    let q00 = rule.integrate(t, |i| a[i][0] * a[i][0] / km2);
    let q01 = rule.integrate(t, |i| a[i][0] * a[i][1] / km2);
    let q11 = rule.integrate(t, |i| a[i][1] * a[i][1] / km2);
    let weight = |i: usize| b[i] / km2 + speed(i) * half;
    let q0 = rule.integrate(t, |i| weight(i) * a[i][0]);
    let q1 = rule.integrate(t, |i| weight(i) * a[i][1]);
    let c = rule.integrate(t, |i| b[i] * b[i] / km2 + b[i] * speed(i));
    Ok(QuadraticObjective {
        matrix: symmetric(q00, q01, q11),
        vector: [q0, q1],
        constant: c,
        kind: ObjectiveKind::MotorEnergy,
        task_name: affine.task_name.clone(),
        integration: rule,
    })
}

fn check_affine<T: Scalar>(affine: &AffineEffort<T>) -> Result<()> {
    if affine.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: affine.len(),
        });
    }
    if affine.a.len() != affine.len() || affine.b.len() != affine.len() {
        return Err(Error::LengthMismatch {
            column: "a/b".into(),
            expected: affine.len(),
            found: affine.a.len().min(affine.b.len()),
        });
    }
    Ok(())
}

/// Nonnegative per-task weights with at least one positive entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskWeights<T>(Vec<T>);

impl<T: Scalar> TaskWeights<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(Error::invalid("weights", "must be finite and nonnegative"));
        }
        if !weights.iter().any(|w| *w > T::zero()) {
            return Err(Error::invalid("weights", "need at least one positive weight"));
        }
        Ok(TaskWeights(weights))
    }

    /// Daily-use stride counts for walking, stair ascent, stair descent and
    /// sit-to-stand, normalized by their total.
    pub fn daily_strides() -> Self {
        let total = T::lit(2280.0);
        TaskWeights([2000.0, 80.0, 80.0, 120.0].iter().map(|&w| T::lit(w) / total).collect())
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `Σ wᵢ (Qᵢ, qᵢ, cᵢ)`; weights are used as given.
pub fn weighted_sum<T: Scalar>(objs: &[QuadraticObjective<T>], w: &TaskWeights<T>) -> Result<QuadraticObjective<T>> {
    if objs.is_empty() || objs.len() != w.len() {
        return Err(Error::LengthMismatch {
            column: "weights".into(),
            expected: objs.len(),
            found: w.len(),
        });
    }
    let kind = objs[0].kind;
    let integration = objs[0].integration;
    if let Some(other) = objs.iter().find(|o| o.kind != kind) {
        return Err(Error::KindMismatch {
            expected: kind.as_str().into(),
            found: other.kind.as_str().into(),
        });
    }
    let mut matrix = [[T::zero(); 2]; 2];
    let mut vector = [T::zero(); 2];
    let mut constant = T::zero();
    let mut names = Vec::with_capacity(objs.len());
    for (obj, &wi) in objs.iter().zip(w.as_slice()) {
        for i in 0..2 {
            for j in 0..2 {
                matrix[i][j] = matrix[i][j] + wi * obj.matrix[i][j];
            }
            vector[i] = vector[i] + wi * obj.vector[i];
        }
        constant = constant + wi * obj.constant;
        names.push(format!("{}*{}", wi, obj.task_name));
    }
    let task_name = if objs.len() == 1 && w.as_slice()[0] == T::one() {
        objs[0].task_name.clone()
    } else {
        format!("weighted({})", names.join(" + "))
    };
    Ok(QuadraticObjective {
        matrix,
        vector,
        constant,
        kind,
        task_name,
        integration,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actuator::{effort_affine_generic, effort_affine_motor};

    fn task(t: Vec<f64>, q: Vec<f64>, tau: Vec<f64>) -> TaskTrajectory<f64> {
        let n = t.len();
        TaskTrajectory::new("t", t, q, Some(vec![0.0; n]), Some(vec![0.0; n]), tau).unwrap()
    }

    #[test]
    fn constant_task_is_rank_one() {
        let (q0, tau0) = (1.5, 2.0);
        let tk = task(vec![0.0, 0.25, 1.0], vec![q0; 3], vec![tau0; 3]);
        let obj = rms_quadratic(&effort_affine_generic(&tk)).unwrap();
        assert_eq!(obj.matrix, [[q0 * q0, -q0], [-q0, 1.0]]);
        assert_eq!(obj.vector, [-q0 * tau0, tau0]);
        assert_eq!(obj.constant, tau0 * tau0);
        assert!(crate::linalg::det(&obj.matrix).abs() < 1e-15);
    }

    #[test]
    fn zero_task() {
        let tk = task(vec![0.0, 1.0, 3.0], vec![0.0; 3], vec![0.0; 3]);
        let obj = rms_quadratic(&effort_affine_generic(&tk)).unwrap();
        assert_eq!(obj.matrix, [[0.0, 0.0], [0.0, 3.0]]);
        assert_eq!(obj.vector, [0.0, 0.0]);
        assert_eq!(obj.constant, 0.0);
        assert_eq!(obj.evaluate(&DesignPoint::origin()), obj.constant);
    }

    #[test]
    fn stationary_energy_is_joule_heating() {
        let motor = MotorParams::<f64>::actpack41();
        let tk = task(vec![0.0, 0.4, 1.0], vec![0.2, 0.3, 0.1], vec![1.0, -2.0, 0.5]);
        let aff = effort_affine_motor(&tk, &motor).unwrap();
        let rms = rms_quadratic(&aff).unwrap();
        let energy = energy_quadratic(&aff, &motor, &tk).unwrap();
        let km2 = motor.k_m * motor.k_m;
        for i in 0..2 {
            for j in 0..2 {
                assert!((energy.matrix[i][j] - rms.matrix[i][j] / km2).abs() <= 1e-15 * energy.matrix[i][j].abs());
            }
            assert!((energy.vector[i] - rms.vector[i] / km2).abs() <= 1e-13 * energy.vector[i].abs());
        }
        assert!((energy.constant - rms.constant / km2).abs() <= 1e-13 * energy.constant);
    }

    #[test]
    fn energy_rejects_generic_source() {
        let tk = task(vec![0.0, 1.0], vec![0.0; 2], vec![1.0; 2]);
        let aff = effort_affine_generic(&tk);
        assert!(matches!(
            energy_quadratic(&aff, &MotorParams::actpack41(), &tk),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn weighted_sum_identities() {
        let tk = task(vec![0.0, 0.5, 1.0], vec![0.1, 0.4, -0.2], vec![1.0, 0.3, -0.7]);
        let obj = rms_quadratic(&effort_affine_generic(&tk)).unwrap();
        let single = weighted_sum(std::slice::from_ref(&obj), &TaskWeights::new(vec![1.0]).unwrap()).unwrap();
        assert_eq!(single, obj);
        let halves = weighted_sum(&[obj.clone(), obj.clone()], &TaskWeights::new(vec![0.5, 0.5]).unwrap()).unwrap();
        assert_eq!(halves.matrix, obj.matrix);
        assert_eq!(halves.vector, obj.vector);
        assert_eq!(halves.constant, obj.constant);

        let mut other = obj.clone();
        other.kind = ObjectiveKind::MotorEnergy;
        assert!(matches!(
            weighted_sum(&[obj.clone(), other], &TaskWeights::new(vec![0.5, 0.5]).unwrap()),
            Err(Error::KindMismatch { .. })
        ));
        assert!(weighted_sum(&[obj], &TaskWeights::new(vec![0.5, 0.5]).unwrap()).is_err());
        assert!(TaskWeights::new(vec![0.0, 0.0]).is_err());
        assert!(TaskWeights::new(vec![-1.0, 2.0]).is_err());
    }

    #[test]
    fn daily_stride_weights() {
        let w = TaskWeights::<f64>::daily_strides();
        let sum: f64 = w.as_slice().iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
        assert!((w.as_slice()[0] - 2000.0 / 2280.0).abs() < 1e-16);
    }

    #[test]
    fn json_layout() {
        let tk = task(vec![0.0, 1.0], vec![1.0, 2.0], vec![1.0, 1.0]);
        let obj = rms_quadratic(&effort_affine_generic(&tk)).unwrap();
        let v: serde_json::Value = serde_json::to_value(&obj).unwrap();
        assert_eq!(v["Q"].as_array().unwrap().len(), 4);
        assert_eq!(v["kind"], "rms-effort");
        assert_eq!(v["integration"], "trapezoid");
        let back: QuadraticObjective<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, obj);
    }

    #[test]
    fn validation_catches_indefinite() {
        let tk = task(vec![0.0, 1.0], vec![1.0, 2.0], vec![1.0, 1.0]);
        let mut obj = rms_quadratic(&effort_affine_generic(&tk)).unwrap();
        assert!(obj.validate().is_ok());
        obj.matrix = [[1.0, 0.0], [0.0, -1.0]];
        assert!(obj.validate().is_err());
        obj.matrix = [[1.0, 0.5], [0.0, 1.0]];
        assert!(obj.validate().is_err());
    }
}
