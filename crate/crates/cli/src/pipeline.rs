//! The design pipeline as separate stages: ingest → quadratics → problem →
//! regions → solve → evaluate, and the bundle that `run` writes.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use pea_design::{
    compare_designs, differentiate, effort_affine_generic, effort_affine_motor, energy_quadratic, export_region,
    feasibility_constraints_with, load_task, render_svg, rms_quadratic, scale_task, solve_soma, solve_sosa, weighted_sum,
    ComparisonTable, DesignPoint, DesignProblem, FeasibilityOptions, LinearConstraints, MotorParams, ObjectiveKind,
    QuadraticObjective, RegionExport, SolveReport, TaskTrajectory, TaskWeights,
};
use serde::Serialize;

use crate::config::{ProjectConfig, Role};
use crate::error::{AtStage, Stage, StageError, StageResult};

/// Boundary samples per exported region.
pub const REGION_SAMPLES: usize = 256;

pub const QUADRATICS_FILE: &str = "quadratics.json";
pub const PROBLEM_FILE: &str = "problem.json";
pub const REGIONS_FILE: &str = "regions.json";
pub const SVG_FILE: &str = "regions.svg";
pub const SOLUTION_FILE: &str = "solution.json";
pub const METRICS_FILE: &str = "metrics.csv";

/// Loaded inputs of a project.
#[derive(Debug, Clone)]
pub struct Project {
    pub config: ProjectConfig,
    pub tasks: Vec<TaskTrajectory<f64>>,
    pub motor: Option<MotorParams<f64>>,
}

pub fn load_motor(path: &Path) -> StageResult<MotorParams<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| StageError::validation(Stage::Ingest, format!("reading {}: {e}", path.display())))?;
    MotorParams::from_json(&text).at(Stage::Ingest)
}

/// Fills absent velocity and acceleration columns when a motor model needs
/// them.
pub fn prepare_task(task: TaskTrajectory<f64>, motor: Option<&MotorParams<f64>>) -> pea_design::Result<TaskTrajectory<f64>> {
    if motor.is_some() && !task.has_derivatives() {
        differentiate(&task)
    } else {
        Ok(task)
    }
}

pub fn ingest(config: &ProjectConfig) -> StageResult<Project> {
    config.validate()?;
    let motor = config.motor.as_ref().map(|p| load_motor(&config.resolve(p))).transpose()?;
    let mut tasks = Vec::with_capacity(config.tasks.len());
    let mut names = BTreeSet::new();
    for task_ref in &config.tasks {
        let path = config.resolve(&task_ref.path);
        let context = |e: pea_design::Error| StageError::from_core(Stage::Ingest, e).with_context(&path.display().to_string());
        let file = fs::File::open(&path)
            .map_err(|e| StageError::validation(Stage::Ingest, format!("opening {}: {e}", path.display())))?;
        let default_name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("task");
        let mut task = load_task(file, task_ref.resolved_format()?, default_name).map_err(context)?;
        if let Some(spec) = &task_ref.scaling {
            task = scale_task(&task, spec).map_err(context)?;
        }
        let task = prepare_task(task, motor.as_ref()).map_err(context)?;
        if !names.insert(task.name.clone()) {
            return Err(StageError::validation(Stage::Ingest, format!("duplicate task name {}", task.name)));
        }
        tasks.push(task);
    }
    Ok(Project {
        config: config.clone(),
        tasks,
        motor,
    })
}

/// Cost of one task: the motor model when a motor is given, otherwise the
/// generic effort source.
pub fn task_quadratic(
    task: &TaskTrajectory<f64>,
    motor: Option<&MotorParams<f64>>,
    kind: ObjectiveKind,
) -> pea_design::Result<QuadraticObjective<f64>> {
    match (kind, motor) {
        (ObjectiveKind::RmsEffort, None) => rms_quadratic(&effort_affine_generic(task)),
        (ObjectiveKind::RmsEffort, Some(m)) => rms_quadratic(&effort_affine_motor(task, m)?),
        (ObjectiveKind::MotorEnergy, Some(m)) => energy_quadratic(&effort_affine_motor(task, m)?, m, task),
        (ObjectiveKind::MotorEnergy, None) => Err(pea_design::Error::InvalidArgument(
            "motor-energy objective needs motor parameters".into(),
        )),
    }
}

pub fn quadratics(project: &Project) -> StageResult<Vec<QuadraticObjective<f64>>> {
    project
        .tasks
        .iter()
        .map(|t| task_quadratic(t, project.motor.as_ref(), project.config.objective_kind))
        .collect::<pea_design::Result<_>>()
        .at(Stage::Quadratics)
}

/// Motor rows of every task, concatenated in task order.
pub fn feasibility_rows(
    tasks: &[TaskTrajectory<f64>],
    motor: &MotorParams<f64>,
    options: &FeasibilityOptions<f64>,
) -> pea_design::Result<LinearConstraints<f64>> {
    let sets = tasks
        .iter()
        .map(|t| feasibility_constraints_with(&effort_affine_motor(t, motor)?, motor, options))
        .collect::<pea_design::Result<Vec<_>>>()?;
    Ok(LinearConstraints::concat(&sets))
}

/// Assembles the design problem from per-task quadratics in config order.
pub fn build_problem(project: &Project, quads: &[QuadraticObjective<f64>]) -> StageResult<DesignProblem<f64>> {
    let config = &project.config;
    let roles: Vec<Role> = config.tasks.iter().map(|t| t.role).collect();
    let objective = match roles.iter().position(|r| *r == Role::Objective) {
        Some(i) => quads[i].clone(),
        None => {
            let terms: Vec<QuadraticObjective<f64>> = roles
                .iter()
                .zip(quads)
                .filter(|(r, _)| **r == Role::Weighted)
                .map(|(_, q)| q.clone())
                .collect();
            let weights = TaskWeights::new(config.weights()).at(Stage::Quadratics)?;
            weighted_sum(&terms, &weights).at(Stage::Quadratics)?
        }
    };
    let mut constraints = Vec::new();
    let mut margins = Vec::new();
    for ((task_ref, role), q) in config.tasks.iter().zip(&roles).zip(quads) {
        if *role == Role::Constraint {
            constraints.push(q.clone());
            margins.push(task_ref.margin.unwrap_or(0.0));
        }
    }
    if margins.iter().all(|m| *m == 0.0) {
        margins.clear();
    }
    let linear = match (&project.motor, config.feasibility) {
        (Some(motor), true) => {
            let options = FeasibilityOptions {
                tau_max: None,
                continuous_rows: config.continuous_rows,
            };
            Some(feasibility_rows(&project.tasks, motor, &options).at(Stage::Quadratics)?)
        }
        _ => None,
    };
    let problem = DesignProblem {
        objective,
        quad_constraints: constraints,
        linear,
        margins,
    };
    problem.validate().at(Stage::Quadratics)?;
    Ok(problem)
}

pub fn regions(quads: &[QuadraticObjective<f64>]) -> Vec<RegionExport<f64>> {
    quads.iter().map(|q| export_region(q, REGION_SAMPLES)).collect()
}

/// SOSA when there are no task constraints, SOMA otherwise.
pub fn solve(problem: &DesignProblem<f64>, tol: f64) -> StageResult<SolveReport<f64>> {
    if problem.quad_constraints.is_empty() && problem.margins.is_empty() {
        solve_sosa(&problem.objective, problem.linear.as_ref(), tol).at(Stage::Solve)
    } else {
        solve_soma(problem, tol).at(Stage::Solve)
    }
}

/// Named designs compared in the metrics table.
pub fn design_list(optimum: &DesignPoint<f64>) -> Vec<(String, DesignPoint<f64>)> {
    vec![("no-spring".to_string(), DesignPoint::origin()), ("optimum".to_string(), *optimum)]
}

pub fn evaluate(project: &Project, optimum: &DesignPoint<f64>) -> StageResult<ComparisonTable<f64>> {
    compare_designs(&design_list(optimum), &project.tasks, project.motor.as_ref()).at(Stage::Evaluate)
}

/// Everything `run` produces, in memory.
#[derive(Debug, Clone, Serialize)]
pub struct Bundle {
    pub quadratics: Vec<QuadraticObjective<f64>>,
    pub problem: DesignProblem<f64>,
    pub regions: Vec<RegionExport<f64>>,
    pub svg: String,
    pub solution: SolveReport<f64>,
    pub metrics: ComparisonTable<f64>,
}

pub fn to_json<S: Serialize>(value: &S) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("pipeline values serialize");
    text.push('\n');
    text
}

impl Bundle {
    /// File name and contents of every artifact, in a fixed order.
    pub fn files(&self) -> Vec<(&'static str, String)> {
        vec![
            (QUADRATICS_FILE, to_json(&self.quadratics)),
            (PROBLEM_FILE, to_json(&self.problem)),
            (REGIONS_FILE, to_json(&self.regions)),
            (SVG_FILE, self.svg.clone()),
            (SOLUTION_FILE, to_json(&self.solution)),
            (METRICS_FILE, self.metrics.to_csv()),
        ]
    }

    pub fn write(&self, dir: &Path) -> StageResult<()> {
        fs::create_dir_all(dir)
            .map_err(|e| StageError::validation(Stage::Write, format!("creating {}: {e}", dir.display())))?;
        for (name, text) in self.files() {
            let path = dir.join(name);
            fs::write(&path, text)
                .map_err(|e| StageError::validation(Stage::Write, format!("writing {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

/// Runs every stage without touching the file system beyond reading inputs.
pub fn build_bundle(config: &ProjectConfig) -> StageResult<Bundle> {
    let project = ingest(config)?;
    let quads = quadratics(&project)?;
    let problem = build_problem(&project, &quads)?;
    let regions = regions(&quads);
    let solution = solve(&problem, config.tol)?;
    let metrics = evaluate(&project, &solution.x_star)?;
    let svg = render_svg(&regions, &[("optimum".to_string(), solution.x_star)]);
    Ok(Bundle {
        quadratics: quads,
        problem,
        regions,
        svg,
        solution,
        metrics,
    })
}

/// Builds the bundle and writes it to the configured output directory.
pub fn run_pipeline(config: &ProjectConfig) -> StageResult<Bundle> {
    let bundle = build_bundle(config)?;
    bundle.write(&config.output_path())?;
    Ok(bundle)
}
