//! Convex QCQP over the two-dimensional spring design.
//!
//! ```text
//! minimize    xᵀQx + 2qᵀx + c
//! subject to  xᵀQᵢx + 2qᵢᵀx + marginᵢ ≤ 0   (other tasks stay beneficial)
//!             M x ≤ p                       (motor feasibility)
//! ```
//!
//! Solved by a log-barrier method with damped Newton centering. The origin
//! sits on the boundary of every task constraint, so a strictly feasible
//! start is found first: a short step against the summed constraint
//! gradients when that works, otherwise a lifted phase-I barrier problem.
//! The barrier point is then polished by Newton's method on the KKT system of
//! the detected active set.

use serde::{Deserialize, Serialize};

use crate::actuator::DesignPoint;
use crate::constraints::LinearConstraints;
use crate::error::{Error, Result};
use crate::linalg::{inverse, mat_vec, norm, pinv_sym, solve_dense, SymEigen};
use crate::quadratic::QuadraticObjective;
use crate::scalar::Scalar;

pub const DEFAULT_TOL: f64 = 1e-8;
/// Condition number above which the objective is treated as rank-deficient.
const RANK_CONDITION: f64 = 1e12;
/// Relative slack below which a constraint is reported active.
const ACTIVE_SLACK: f64 = 1e-4;
const BARRIER_FACTOR: f64 = 10.0;
const MAX_NEWTON: usize = 100;
const MAX_OUTER: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DesignProblem<T> {
    pub objective: QuadraticObjective<T>,
    /// Task constraints `xᵀQᵢx + 2qᵢᵀx ≤ −marginᵢ`.
    #[serde(default)]
    pub quad_constraints: Vec<QuadraticObjective<T>>,
    #[serde(default)]
    pub linear: Option<LinearConstraints<T>>,
    /// Optional nonnegative offsets pushing the solution into the interior of
    /// each task region; empty means all zero.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub margins: Vec<T>,
}

impl<T: Scalar> DesignProblem<T> {
    pub fn new(objective: QuadraticObjective<T>) -> Self {
        DesignProblem {
            objective,
            quad_constraints: Vec::new(),
            linear: None,
            margins: Vec::new(),
        }
    }

    pub fn with_constraints(mut self, constraints: Vec<QuadraticObjective<T>>) -> Self {
        self.quad_constraints = constraints;
        self
    }

    pub fn with_linear(mut self, linear: LinearConstraints<T>) -> Self {
        self.linear = Some(linear);
        self
    }

    fn margin(&self, i: usize) -> T {
        self.margins.get(i).copied().unwrap_or_else(T::zero)
    }

    pub fn validate(&self) -> Result<()> {
        self.objective.validate()?;
        for c in &self.quad_constraints {
            c.validate()?;
        }
        if let Some(lin) = &self.linear {
            lin.validate()?;
        }
        if !self.margins.is_empty() && self.margins.len() != self.quad_constraints.len() {
            return Err(Error::LengthMismatch {
                column: "margins".into(),
                expected: self.quad_constraints.len(),
                found: self.margins.len(),
            });
        }
        if self.margins.iter().any(|m| !m.is_finite() || *m < T::zero()) {
            return Err(Error::invalid("margins", "must be finite and nonnegative"));
        }
        Ok(())
    }

    /// `g_j(x)` for every constraint, quadratic rows first then linear rows.
    pub fn constraint_values(&self, x: &DesignPoint<T>) -> Vec<T> {
        let mut out: Vec<T> = self
            .quad_constraints
            .iter()
            .enumerate()
            .map(|(i, c)| c.excess(x) + self.margin(i))
            .collect();
        if let Some(lin) = &self.linear {
            out.extend(lin.residuals(x));
        }
        out
    }

    /// Scaled violation tolerance for each constraint, same order as
    /// [`Self::constraint_values`].
    fn feasibility_tolerances(&self, tol: T) -> Vec<T> {
        let mut out: Vec<T> = self
            .quad_constraints
            .iter()
            .map(|c| tol * (T::one() + c.constant.abs()))
            .collect();
        if let Some(lin) = &self.linear {
            out.extend(lin.p.iter().map(|p| tol * (T::one() + p.abs())));
        }
        out
    }

    /// True when `x` meets every constraint within the solver tolerance.
    pub fn is_feasible(&self, x: &DesignPoint<T>, tol: T) -> bool {
        self.constraint_values(x)
            .iter()
            .zip(self.feasibility_tolerances(tol))
            .all(|(g, t)| *g <= t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    /// The task regions share no interior; the only beneficial design is no
    /// spring at all.
    OriginOnly,
    /// The origin violates `Mx ≤ p` and no feasible design was found.
    InfeasibleLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Quadratic,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveConstraint<T> {
    pub kind: ConstraintKind,
    pub index: usize,
    /// `g(x*)`; nonpositive up to tolerance.
    pub residual: T,
    pub multiplier: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport<T: Copy> {
    pub x_star: DesignPoint<T>,
    pub objective_value: T,
    /// `c − f(x*)`.
    pub objective_reduction: T,
    pub active_constraints: Vec<ActiveConstraint<T>>,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Norm of the Lagrangian gradient, objective scaled by `1/(1 + |c|)`.
    pub kkt_residual: T,
    /// The minimizer is not unique; `x_star` is the minimum-norm choice.
    #[serde(default)]
    pub non_unique: bool,
}

impl<T: Scalar> SolveReport<T> {
    fn at(objective: &QuadraticObjective<T>, x: DesignPoint<T>, status: SolveStatus) -> Self {
        let value = objective.evaluate(&x);
        SolveReport {
            x_star: x,
            objective_value: value,
            objective_reduction: objective.constant - value,
            active_constraints: Vec::new(),
            status,
            iterations: 0,
            kkt_residual: T::zero(),
            non_unique: false,
        }
    }
}

// ---------------------------------------------------------------------------
// Generic small-dimensional quadratics: xᵀAx + 2bᵀx + c.

#[derive(Debug, Clone, Copy)]
struct Quad<T, const N: usize> {
    a: [[T; N]; N],
    b: [T; N],
    c: T,
}

impl<T: Scalar, const N: usize> Quad<T, N> {
    fn value(&self, x: &[T; N]) -> T {
        let mut acc = self.c;
        for i in 0..N {
            let mut row = T::zero();
            for j in 0..N {
                row = row + self.a[i][j] * x[j];
            }
            acc = acc + x[i] * (row + T::lit(2.0) * self.b[i]);
        }
        acc
    }

    fn gradient(&self, x: &[T; N]) -> [T; N] {
        let mut g = [T::zero(); N];
        for i in 0..N {
            let mut row = self.b[i];
            for j in 0..N {
                row = row + self.a[i][j] * x[j];
            }
            g[i] = T::lit(2.0) * row;
        }
        g
    }

    fn scaled(&self, s: T) -> Self {
        let mut out = *self;
        for i in 0..N {
            for j in 0..N {
                out.a[i][j] = out.a[i][j] * s;
            }
            out.b[i] = out.b[i] * s;
        }
        out.c = out.c * s;
        out
    }

    fn magnitude(&self) -> T {
        let mut m = self.c.abs();
        for i in 0..N {
            m = m.max(self.b[i].abs());
            for j in 0..N {
                m = m.max(self.a[i][j].abs());
            }
        }
        m
    }
}

fn lift_objective<T: Scalar>(obj: &QuadraticObjective<T>) -> Quad<T, 2> {
    Quad {
        a: obj.matrix,
        b: obj.vector,
        c: obj.constant,
    }
}

struct BarrierOutcome<T, const N: usize> {
    x: [T; N],
    t: T,
    iterations: usize,
}

/// Minimizes `t·f(x) − Σ log(−g_j(x))` for increasing `t` until `m/t < gap`.
/// `x0` must be strictly feasible.
fn barrier<T: Scalar, const N: usize>(
    objective: &Quad<T, N>,
    constraints: &[Quad<T, N>],
    x0: [T; N],
    gap: T,
) -> Result<BarrierOutcome<T, N>> {
    let m = T::from_count(constraints.len().max(1));
    let mut t = T::one();
    let mut x = x0;
    let mut iterations = 0;
    for _ in 0..MAX_OUTER {
        iterations += center(objective, constraints, &mut x, t)?;
        if m / t < gap {
            return Ok(BarrierOutcome { x, t, iterations });
        }
        t = t * T::lit(BARRIER_FACTOR);
    }
    Ok(BarrierOutcome { x, t, iterations })
}

fn barrier_value<T: Scalar, const N: usize>(objective: &Quad<T, N>, constraints: &[Quad<T, N>], x: &[T; N], t: T) -> Option<T> {
    let mut phi = t * objective.value(x);
    for g in constraints {
        let v = g.value(x);
        if !(v < T::zero()) {
            return None;
        }
        phi = phi - (-v).ln();
    }
    Some(phi)
}

fn center<T: Scalar, const N: usize>(objective: &Quad<T, N>, constraints: &[Quad<T, N>], x: &mut [T; N], t: T) -> Result<usize> {
    let two = T::lit(2.0);
    let mut iterations = 0;
    for _ in 0..MAX_NEWTON {
        iterations += 1;
        let mut grad = objective.gradient(x).map(|g| g * t);
        let mut hess = [[T::zero(); N]; N];
        for i in 0..N {
            for j in 0..N {
                hess[i][j] = two * t * objective.a[i][j];
            }
        }
        for g in constraints {
            let v = g.value(x);
            let dg = g.gradient(x);
            let inv = T::one() / (-v);
            for i in 0..N {
                grad[i] = grad[i] + dg[i] * inv;
                for j in 0..N {
                    hess[i][j] = hess[i][j] + two * g.a[i][j] * inv + dg[i] * dg[j] * inv * inv;
                }
            }
        }
        let step = newton_step(&hess, &grad).ok_or_else(|| Error::NotConverged("singular barrier Hessian".into()))?;
        let decrement = -(0..N).fold(T::zero(), |acc, i| acc + grad[i] * step[i]);
        if decrement / two <= T::lit(1e-12) {
            break;
        }
        let phi0 = barrier_value(objective, constraints, x, t).ok_or_else(|| Error::NotConverged("left the barrier domain".into()))?;
        let mut s = T::one();
        let mut accepted = false;
        for _ in 0..80 {
            let trial: [T; N] = std::array::from_fn(|i| x[i] + s * step[i]);
            if let Some(phi) = barrier_value(objective, constraints, &trial, t) {
                if phi <= phi0 - T::lit(0.25) * s * decrement {
                    *x = trial;
                    accepted = true;
                    break;
                }
            }
            s = s * T::lit(0.5);
        }
        if !accepted {
            break;
        }
    }
    Ok(iterations)
}

/// Solves `H d = −g`, retrying with a growing ridge when `H` is singular.
fn newton_step<T: Scalar, const N: usize>(hess: &[[T; N]; N], grad: &[T; N]) -> Option<[T; N]> {
    let trace = (0..N).fold(T::zero(), |acc, i| acc + hess[i][i].abs());
    let mut ridge = T::zero();
    for _ in 0..8 {
        let a: Vec<Vec<T>> = (0..N)
            .map(|i| (0..N).map(|j| hess[i][j] + if i == j { ridge } else { T::zero() }).collect())
            .collect();
        let b: Vec<T> = grad.iter().map(|g| -*g).collect();
        if let Some(d) = solve_dense(a, b) {
            if d.iter().all(|v| v.is_finite()) {
                return Some(std::array::from_fn(|i| d[i]));
            }
        }
        ridge = if ridge == T::zero() {
            T::lit(1e-12) * (trace + T::one())
        } else {
            ridge * T::lit(100.0)
        };
    }
    None
}

// ---------------------------------------------------------------------------

pub fn default_tol<T: Scalar>() -> T {
    T::lit(DEFAULT_TOL)
}

fn is_rank_deficient<T: Scalar>(obj: &QuadraticObjective<T>) -> bool {
    !(SymEigen::new(&obj.matrix).condition_number() <= T::lit(RANK_CONDITION))
}

/// Spring optimized for a single activity: no task constraints. Without
/// linear rows the minimizer is computed directly.
pub fn solve_sosa<T: Scalar>(
    objective: &QuadraticObjective<T>,
    linear: Option<&LinearConstraints<T>>,
    tol: T,
) -> Result<SolveReport<T>> {
    match linear {
        Some(lin) if !lin.is_empty() => {
            let problem = DesignProblem {
                objective: objective.clone(),
                quad_constraints: Vec::new(),
                linear: Some(lin.clone()),
                margins: Vec::new(),
            };
            solve_soma(&problem, tol)
        }
        _ => {
            objective.validate()?;
            unconstrained(objective, tol)
        }
    }
}

fn unconstrained<T: Scalar>(objective: &QuadraticObjective<T>, tol: T) -> Result<SolveReport<T>> {
    let scale = T::one() + objective.constant.abs();
    let rank_deficient = is_rank_deficient(objective);
    let x = if rank_deficient {
        let pinv = pinv_sym(&objective.matrix, T::lit(1.0 / RANK_CONDITION));
        let w = mat_vec(&pinv, &objective.vector);
        [-w[0], -w[1]]
    } else {
        let inv = inverse(&objective.matrix).ok_or(Error::Unbounded)?;
        let w = mat_vec(&inv, &objective.vector);
        [-w[0], -w[1]]
    };
    let x = DesignPoint::new(x[0], x[1]);
    let grad = objective.gradient(&x);
    let kkt = norm(&grad) / scale;
    let vec_scale = T::one() + norm(&objective.vector);
    if !(norm(&grad) <= tol.sqrt() * vec_scale) {
        // q has a component outside range(Q): the cost decreases without bound.
        return Err(Error::Unbounded);
    }
    let mut report = SolveReport::at(objective, x, SolveStatus::Optimal);
    report.kkt_residual = kkt;
    report.non_unique = rank_deficient;
    if report.objective_value > objective.constant {
        report = SolveReport::at(objective, DesignPoint::origin(), SolveStatus::Optimal);
        report.non_unique = rank_deficient;
    }
    Ok(report)
}

/// Spring optimized for multiple activities.
pub fn solve_soma<T: Scalar>(problem: &DesignProblem<T>, tol: T) -> Result<SolveReport<T>> {
    problem.validate()?;
    if !(tol > T::zero()) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    let lin_rows = problem.linear.as_ref().map_or(0, |l| l.len());
    if problem.quad_constraints.is_empty() && lin_rows == 0 {
        return unconstrained(&problem.objective, tol);
    }

    let objective = &problem.objective;
    let scale = T::one() + objective.constant.abs();
    let rank_deficient = is_rank_deficient(objective);
    let constraints = lift_constraints(problem);
    let origin = DesignPoint::origin();
    let origin_feasible = problem.is_feasible(&origin, tol);

    let Some((x0, phase_iters)) = strict_start(problem, &constraints, tol)? else {
        if origin_feasible {
            let mut report = SolveReport::at(objective, origin, SolveStatus::OriginOnly);
            report.active_constraints = (0..problem.quad_constraints.len())
                .map(|i| ActiveConstraint {
                    kind: ConstraintKind::Quadratic,
                    index: i,
                    residual: problem.quad_constraints[i].excess(&origin) + problem.margin(i),
                    multiplier: T::zero(),
                })
                .collect();
            return Ok(report);
        }
        if problem.margins.iter().any(|m| *m > T::zero()) {
            return Err(Error::InvalidArgument("constraint margins leave no feasible design".into()));
        }
        return Ok(SolveReport::at(objective, origin, SolveStatus::InfeasibleLinear));
    };

    // Normalized objective, regularized toward the minimum-norm optimum when
    // the cost is flat along some direction.
    let mut normalized = lift_objective(objective).scaled(T::one() / scale);
    if rank_deficient {
        let ridge = T::lit(1e-10) * (normalized.a[0][0].abs() + normalized.a[1][1].abs() + T::lit(1e-3));
        normalized.a[0][0] = normalized.a[0][0] + ridge;
        normalized.a[1][1] = normalized.a[1][1] + ridge;
    }
    let outcome = barrier(&normalized, &constraints, x0, tol)?;
    let mut iterations = phase_iters + outcome.iterations;
    let xb = outcome.x;
    let duals: Vec<T> = constraints
        .iter()
        .map(|g| T::one() / (outcome.t * (-g.value(&xb))))
        .collect();

    let (x_star, multipliers, polish_iters) = match polish(problem, &constraints, &normalized, &xb, &duals, tol) {
        Some((x, lambda, it)) => (x, lambda, it),
        None => (xb, duals.clone(), 0),
    };
    iterations += polish_iters;

    let x = DesignPoint::new(x_star[0], x_star[1]);
    let magnitude = norm(&x_star);
    if !(magnitude < T::lit(1e8) * (T::one() + norm(&xb).min(T::lit(1e8)))) || !x.is_finite() {
        return Err(Error::Unbounded);
    }
    // Lagrangian gradient of the normalized problem.
    let mut grad = normalized.gradient(&x_star);
    for (g, &lambda) in constraints.iter().zip(&multipliers) {
        let dg = g.gradient(&x_star);
        grad[0] = grad[0] + lambda * dg[0];
        grad[1] = grad[1] + lambda * dg[1];
    }
    let mut report = SolveReport::at(objective, x, SolveStatus::Optimal);
    report.iterations = iterations;
    report.kkt_residual = norm(&grad);

    let values = problem.constraint_values(&x);
    let n_quad = problem.quad_constraints.len();
    for (j, (&g, &lambda)) in values.iter().zip(&multipliers).enumerate() {
        if is_active(&constraints[j], &x_star, g, lambda) {
            report.active_constraints.push(ActiveConstraint {
                kind: if j < n_quad { ConstraintKind::Quadratic } else { ConstraintKind::Linear },
                index: if j < n_quad { j } else { j - n_quad },
                residual: g,
                multiplier: lambda.max(T::zero()),
            });
        }
    }
    report.non_unique = rank_deficient && report.active_constraints.is_empty();

    if origin_feasible && report.objective_value > objective.constant {
        let mut fallback = SolveReport::at(objective, origin, SolveStatus::Optimal);
        fallback.iterations = iterations;
        return Ok(fallback);
    }
    Ok(report)
}

fn relative_slack<T: Scalar>(g: &Quad<T, 2>, x: &[T; 2], value: T) -> T {
    let dg = g.gradient(x);
    let scale = norm(&dg) * (T::one() + norm(x)) + g.magnitude() * T::lit(1e-12);
    if scale > T::zero() {
        -value / scale
    } else {
        T::infinity()
    }
}

fn is_active<T: Scalar>(g: &Quad<T, 2>, x: &[T; 2], value: T, multiplier: T) -> bool {
    relative_slack(g, x, value) <= T::lit(ACTIVE_SLACK) && multiplier > T::zero()
}

/// Constraint set as quadratics in x: task rows then linear rows.
fn lift_constraints<T: Scalar>(problem: &DesignProblem<T>) -> Vec<Quad<T, 2>> {
    let mut out: Vec<Quad<T, 2>> = problem
        .quad_constraints
        .iter()
        .enumerate()
        .map(|(i, c)| Quad {
            a: c.matrix,
            b: c.vector,
            c: problem.margin(i),
        })
        .collect();
    if let Some(lin) = &problem.linear {
        let half = T::lit(0.5);
        out.extend(lin.m.iter().zip(&lin.p).map(|(row, &p)| Quad {
            a: [[T::zero(); 2]; 2],
            b: [row[0] * half, row[1] * half],
            c: -p,
        }));
    }
    out
}

/// A strictly feasible starting point, or `None` when the constraint set has
/// empty interior.
fn strict_start<T: Scalar>(problem: &DesignProblem<T>, constraints: &[Quad<T, 2>], tol: T) -> Result<Option<([T; 2], usize)>> {
    let strictly = |x: &[T; 2]| constraints.iter().all(|g| g.value(x) < T::zero());
    let origin = [T::zero(); 2];
    if strictly(&origin) {
        return Ok(Some((origin, 0)));
    }
    // Step against the aggregate task gradient at the origin.
    let mut sum = [T::zero(); 2];
    for c in &problem.quad_constraints {
        sum[0] = sum[0] + c.vector[0];
        sum[1] = sum[1] + c.vector[1];
    }
    let length = norm(&sum);
    if length > T::zero() {
        let dir = [-sum[0] / length, -sum[1] / length];
        let mut reach = T::one();
        for c in problem.quad_constraints.iter().chain(std::iter::once(&problem.objective)) {
            let w = mat_vec(&pinv_sym(&c.matrix, T::lit(1.0 / RANK_CONDITION)), &c.vector);
            reach = reach.max(T::lit(2.0) * norm(&w));
        }
        let mut eps = reach;
        for _ in 0..80 {
            let x = [eps * dir[0], eps * dir[1]];
            if strictly(&x) {
                return Ok(Some((x, 0)));
            }
            eps = eps * T::lit(0.5);
        }
    }
    phase_one(constraints, tol)
}

/// Lifted problem `min s  s.t.  ĝ_j(x) ≤ s`, constraints normalized to unit
/// magnitude, with `s ≥ −1` and a large ball on `x` to keep it bounded.
fn phase_one<T: Scalar>(constraints: &[Quad<T, 2>], tol: T) -> Result<Option<([T; 2], usize)>> {
    let mut reach = T::one();
    let mut lifted: Vec<Quad<T, 3>> = Vec::with_capacity(constraints.len() + 2);
    for g in constraints {
        let m = g.magnitude();
        let g = if m > T::zero() { g.scaled(T::one() / m) } else { *g };
        let mut a = [[T::zero(); 3]; 3];
        for i in 0..2 {
            for j in 0..2 {
                a[i][j] = g.a[i][j];
            }
        }
        let grad0 = norm(&g.b);
        if grad0 > T::zero() {
            reach = reach.max(T::one() / grad0);
        }
        lifted.push(Quad {
            a,
            b: [g.b[0], g.b[1], T::lit(-0.5)],
            c: g.c,
        });
    }
    // s ≥ −1
    lifted.push(Quad {
        a: [[T::zero(); 3]; 3],
        b: [T::zero(), T::zero(), T::lit(-0.5)],
        c: -T::one(),
    });
    // ‖x‖² ≤ R²
    let radius = T::lit(1e6) * reach;
    let inv_r2 = T::one() / (radius * radius);
    let mut ball = [[T::zero(); 3]; 3];
    ball[0][0] = inv_r2;
    ball[1][1] = inv_r2;
    lifted.push(Quad {
        a: ball,
        b: [T::zero(); 3],
        c: -T::one(),
    });
    let objective = Quad {
        a: [[T::zero(); 3]; 3],
        b: [T::zero(), T::zero(), T::lit(0.5)],
        c: T::zero(),
    };
    let start_s = constraints
        .iter()
        .map(|g| {
            let m = g.magnitude();
            if m > T::zero() {
                g.c / m
            } else {
                g.c
            }
        })
        .fold(T::zero(), |acc, v| acc.max(v))
        + T::one();
    let outcome = barrier(&objective, &lifted, [T::zero(), T::zero(), start_s], tol.min(T::lit(1e-9)))?;
    let x = [outcome.x[0], outcome.x[1]];
    let s = outcome.x[2];
    let interior = s < -T::lit(1e-9) && constraints.iter().all(|g| g.value(&x) < T::zero());
    Ok(interior.then_some((x, outcome.iterations)))
}

/// Newton's method on the KKT equations of the constraints that look active
/// at the barrier point. Returns the polished point with multipliers for
/// every constraint, or `None` when the result fails any check.
fn polish<T: Scalar>(
    problem: &DesignProblem<T>,
    constraints: &[Quad<T, 2>],
    objective: &Quad<T, 2>,
    xb: &[T; 2],
    duals: &[T],
    tol: T,
) -> Option<([T; 2], Vec<T>, usize)> {
    let mut candidates: Vec<usize> = (0..constraints.len())
        .filter(|&j| relative_slack(&constraints[j], xb, constraints[j].value(xb)) <= T::lit(ACTIVE_SLACK))
        .collect();
    candidates.sort_by(|&i, &j| duals[j].partial_cmp(&duals[i]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j)));
    candidates.truncate(2);
    candidates.sort_unstable();

    let k = candidates.len();
    let mut x = *xb;
    let mut lambda: Vec<T> = candidates.iter().map(|&j| duals[j]).collect();
    let mut iterations = 0;
    let two = T::lit(2.0);
    for _ in 0..30 {
        iterations += 1;
        let mut residual = objective.gradient(&x).to_vec();
        let mut jac = vec![vec![T::zero(); 2 + k]; 2 + k];
        for i in 0..2 {
            for j in 0..2 {
                jac[i][j] = two * objective.a[i][j];
            }
        }
        for (slot, &cj) in candidates.iter().enumerate() {
            let g = &constraints[cj];
            let dg = g.gradient(&x);
            for i in 0..2 {
                residual[i] = residual[i] + lambda[slot] * dg[i];
                for j in 0..2 {
                    jac[i][j] = jac[i][j] + lambda[slot] * two * g.a[i][j];
                }
                jac[i][2 + slot] = dg[i];
                jac[2 + slot][i] = dg[i];
            }
            residual.push(g.value(&x));
        }
        let size = residual.iter().fold(T::zero(), |acc, r| acc.max(r.abs()));
        if size <= T::epsilon() * T::lit(16.0) * (T::one() + norm(&x)) {
            break;
        }
        let step = solve_dense(jac, residual.iter().map(|r| -*r).collect())?;
        x[0] = x[0] + step[0];
        x[1] = x[1] + step[1];
        for slot in 0..k {
            lambda[slot] = lambda[slot] + step[2 + slot];
        }
        if !(x[0].is_finite() && x[1].is_finite()) {
            return None;
        }
    }
    if lambda.iter().any(|l| *l < T::zero()) {
        return None;
    }
    let point = DesignPoint::new(x[0], x[1]);
    if !problem.is_feasible(&point, tol) {
        return None;
    }
    // Must not be worse than the barrier point beyond its duality gap.
    let gap = tol * T::from_count(constraints.len().max(1));
    if objective.value(&x) > objective.value(xb) + gap {
        return None;
    }
    let mut multipliers = vec![T::zero(); constraints.len()];
    for (slot, &cj) in candidates.iter().enumerate() {
        multipliers[cj] = lambda[slot];
    }
    Some((x, multipliers, iterations))
}

/// Axis-aligned search box for [`grid_oracle`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridBox<T> {
    pub k_p: (T, T),
    pub tau_p: (T, T),
}

impl<T: Scalar> GridBox<T> {
    pub fn contains_origin(&self) -> bool {
        self.k_p.0 <= T::zero() && self.k_p.1 >= T::zero() && self.tau_p.0 <= T::zero() && self.tau_p.1 >= T::zero()
    }

    /// Grid spacing along each axis at `resolution` points per axis.
    pub fn cell(&self, resolution: usize) -> (T, T) {
        let d = T::from_count(resolution - 1);
        ((self.k_p.1 - self.k_p.0) / d, (self.tau_p.1 - self.tau_p.0) / d)
    }
}

/// Exhaustive search over a `resolution × resolution` grid; returns the best
/// feasible grid point.
pub fn grid_oracle<T: Scalar>(problem: &DesignProblem<T>, bounds: &GridBox<T>, resolution: usize) -> Result<DesignPoint<T>> {
    if resolution < 100 {
        return Err(Error::InvalidArgument(format!("grid resolution must be at least 100, got {resolution}")));
    }
    if !bounds.contains_origin() {
        return Err(Error::InvalidArgument("grid box must contain the origin".into()));
    }
    let (dk, dt) = bounds.cell(resolution);
    let mut best: Option<(T, DesignPoint<T>)> = None;
    for i in 0..resolution {
        let k_p = bounds.k_p.0 + dk * T::from_count(i);
        for j in 0..resolution {
            let tau_p = bounds.tau_p.0 + dt * T::from_count(j);
            let x = DesignPoint::new(k_p, tau_p);
            let f = problem.objective.evaluate(&x);
            if best.as_ref().is_some_and(|(b, _)| f >= *b) {
                continue;
            }
            let quad_ok = problem
                .quad_constraints
                .iter()
                .enumerate()
                .all(|(n, c)| c.excess(&x) + problem.margin(n) <= T::zero());
            let lin_ok = quad_ok && problem.linear.as_ref().is_none_or(|l| l.is_satisfied(&x, T::zero()));
            if lin_ok {
                best = Some((f, x));
            }
        }
    }
    best.map(|(_, x)| x).ok_or(Error::NoFeasibleGridPoint)
}
