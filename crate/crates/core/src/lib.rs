//! Stiffness and preload selection for a parallel elastic actuator.
//!
//! A linear parallel spring `τ_s = −k_p q + τ_p` makes the source effort
//! affine in the design `x = (k_p, τ_p)`, so both the integrated squared
//! effort and the motor energy of a task are convex quadratics of `x`. Each
//! task's *benefit region* (designs no worse than having no spring) is a
//! sublevel ellipse through the origin. A spring serving several tasks is
//! found by minimizing one quadratic while keeping the others inside their
//! regions.
//!
//! ```
//! use pea_design::{effort_affine_generic, rms_quadratic, solve_sosa, TaskTrajectory};
//!
//! let t: Vec<f64> = (0..2001).map(|i| i as f64 * std::f64::consts::TAU / 2000.0).collect();
//! let q: Vec<f64> = t.iter().map(|x| x.sin()).collect();
//! let task = TaskTrajectory::new("sin", t, q.clone(), None, None, q).unwrap();
//! let obj = rms_quadratic(&effort_affine_generic(&task)).unwrap();
//! let best = solve_sosa(&obj, None, 1e-8).unwrap();
//! assert!((best.x_star.k_p - 1.0).abs() < 1e-6);
//! ```

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod actuator;
pub mod calculus;
pub mod constraints;
pub mod ellipse;
pub mod error;
pub mod evaluation;
pub mod linalg;
pub mod quadratic;
pub mod scalar;
pub mod solver;
pub mod sysid;
pub mod trajectory;

pub use actuator::{
    effort_affine_generic, effort_affine_motor, effort_affine_motor_with_unmodeled, AffineEffort, DesignPoint, MotorParams,
    SourceKind,
};
pub use calculus::IntegrationRule;
pub use constraints::{feasibility_constraints, feasibility_constraints_with, FeasibilityOptions, LinearConstraints, RowKind, RowTag};
pub use ellipse::{
    benefit_region, boundary_points, common_benefit, contains, export_region, render_svg, BenefitRegion, Degeneracy, MembershipReport,
    RegionExport, TaskMembership,
};
pub use error::{Error, Result};
pub use evaluation::{
    compare_designs, evaluate_design, evaluate_design_with, spiral_spring_stiffness, spiral_spring_thickness, ComparisonRow,
    ComparisonTable, SpringGeometry, TaskMetrics,
};
pub use quadratic::{energy_quadratic, rms_quadratic, weighted_sum, ObjectiveKind, QuadraticObjective, TaskWeights};
pub use scalar::{sign, Scalar};
pub use solver::{
    grid_oracle, solve_soma, solve_sosa, ActiveConstraint, ConstraintKind, DesignProblem, GridBox, SolveReport, SolveStatus,
};
pub use sysid::{identify_motor_params, IdentifiedFriction, MotorTrace};
pub use trajectory::{differentiate, load_task, parse_task, scale_task, ScalingMode, ScalingSpec, TaskDocument, TaskFormat, TaskTrajectory};

/// Double-precision instantiations.
pub mod f64 {
    pub type DesignPoint = super::DesignPoint<f64>;
    pub type TaskTrajectory = super::TaskTrajectory<f64>;
    pub type MotorParams = super::MotorParams<f64>;
    pub type QuadraticObjective = super::QuadraticObjective<f64>;
    pub type LinearConstraints = super::LinearConstraints<f64>;
    pub type DesignProblem = super::DesignProblem<f64>;
    pub type SolveReport = super::SolveReport<f64>;
    pub type TaskMetrics = super::TaskMetrics<f64>;
}

/// Single-precision instantiations.
pub mod f32 {
    pub type DesignPoint = super::DesignPoint<f32>;
    pub type TaskTrajectory = super::TaskTrajectory<f32>;
    pub type MotorParams = super::MotorParams<f32>;
    pub type QuadraticObjective = super::QuadraticObjective<f32>;
    pub type LinearConstraints = super::LinearConstraints<f32>;
    pub type DesignProblem = super::DesignProblem<f32>;
    pub type SolveReport = super::SolveReport<f32>;
    pub type TaskMetrics = super::TaskMetrics<f32>;
}

pub type DesignPointF64 = DesignPoint<f64>;
pub type TaskTrajectoryF64 = TaskTrajectory<f64>;
pub type MotorParamsF64 = MotorParams<f64>;
pub type QuadraticObjectiveF64 = QuadraticObjective<f64>;
pub type DesignProblemF64 = DesignProblem<f64>;
pub type SolveReportF64 = SolveReport<f64>;
pub type DesignPointF32 = DesignPoint<f32>;
pub type TaskTrajectoryF32 = TaskTrajectory<f32>;
pub type QuadraticObjectiveF32 = QuadraticObjective<f32>;
