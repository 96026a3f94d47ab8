//! JSON service over an in-memory project store.
//!
//! | method | path            | body / query                                   | response                     |
//! |--------|-----------------|------------------------------------------------|------------------------------|
//! | POST   | `/tasks`        | task document                                  | task summary (201)           |
//! | GET    | `/tasks`        |                                                | task summaries               |
//! | GET    | `/tasks/{id}`   |                                                | task document                |
//! | POST   | `/motor`        | motor parameters                               | stored parameters            |
//! | GET    | `/motor`        |                                                | stored parameters            |
//! | POST   | `/quadratics`   | `{ids?, objective_kind?, motor?}`              | quadratic objectives         |
//! | GET    | `/regions`      | `?ids=a,b&kind=rms-effort&n=256`               | region exports               |
//! | POST   | `/problem`      | `{objective, constraints?, objective_kind?, …}`| design problem               |
//! | POST   | `/solve`        | design problem, `?tol=`                        | solve report                 |
//! | POST   | `/evaluate`     | `{x, ids?, objective_kind?, motor?}`           | metrics and membership       |
//!
//! Errors are `{stage, class, message}` with status 400 (404 for unknown
//! task ids). A task's velocity and acceleration are differentiated on use
//! when a motor model needs them and the upload omitted them.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{DefaultBodyLimit, Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pea_design::{
    common_benefit, evaluate_design, export_region, weighted_sum, DesignPoint, DesignProblem, MembershipReport,
    MotorParams, ObjectiveKind, QuadraticObjective, RegionExport, SolveReport, TaskDocument, TaskMetrics,
    TaskTrajectory, TaskWeights,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{AtStage, ErrorClass, Stage, StageError, StageResult};
use crate::pipeline::{feasibility_rows, prepare_task, solve, task_quadratic, REGION_SAMPLES};

const BODY_LIMIT: usize = 64 * 1024 * 1024;

/// Tasks and motor shared by all requests.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Store {
    pub tasks: BTreeMap<String, TaskTrajectory<f64>>,
    pub motor: Option<MotorParams<f64>>,
}

/// On-disk form of [`Store`].
#[derive(Debug, Default, Serialize, Deserialize)]
struct Snapshot {
    tasks: Vec<TaskDocument>,
    #[serde(default)]
    motor: Option<MotorParams<f64>>,
}

impl Store {
    pub fn load_snapshot(path: &Path) -> StageResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| StageError::validation(Stage::Ingest, format!("reading {}: {e}", path.display())))?;
        let snap: Snapshot = serde_json::from_str(&text).map_err(|e| StageError::validation(Stage::Parse, e.to_string()))?;
        let mut store = Store {
            motor: snap.motor,
            ..Store::default()
        };
        for doc in snap.tasks {
            let task = TaskTrajectory::from_document(doc, "task").at(Stage::Ingest)?;
            store.tasks.insert(task.name.clone(), task);
        }
        Ok(store)
    }

    pub fn save_snapshot(&self, path: &Path) -> StageResult<()> {
        let snap = Snapshot {
            tasks: self.tasks.values().map(TaskTrajectory::to_document).collect(),
            motor: self.motor,
        };
        let text = serde_json::to_string(&snap).expect("snapshot serializes");
        std::fs::write(path, text)
            .map_err(|e| StageError::validation(Stage::Write, format!("writing {}: {e}", path.display())))
    }

    fn pick(&self, ids: Option<&[String]>, stage: Stage) -> Result<Vec<TaskTrajectory<f64>>, ApiError> {
        match ids {
            None => Ok(self.tasks.values().cloned().collect()),
            Some(ids) => ids
                .iter()
                .map(|id| {
                    self.tasks
                        .get(id)
                        .cloned()
                        .ok_or_else(|| StageError::not_found(stage, format!("unknown task id {id}")).into())
                })
                .collect(),
        }
    }
}

#[derive(Debug, Default)]
pub struct AppState {
    pub store: RwLock<Store>,
    pub snapshot: Option<PathBuf>,
}

impl AppState {
    pub fn new(store: Store, snapshot: Option<PathBuf>) -> Arc<Self> {
        Arc::new(AppState {
            store: RwLock::new(store),
            snapshot,
        })
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, Store> {
        self.store.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, Store> {
        self.store.write().unwrap_or_else(|e| e.into_inner())
    }

    fn persist(&self, store: &Store) -> Result<(), ApiError> {
        if let Some(path) = &self.snapshot {
            store.save_snapshot(path)?;
        }
        Ok(())
    }
}

/// Error response: the stage error as JSON with a matching status.
#[derive(Debug)]
pub struct ApiError(pub StageError);

impl From<StageError> for ApiError {
    fn from(e: StageError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.0.class {
            ErrorClass::NotFound => StatusCode::NOT_FOUND,
            ErrorClass::Validation => StatusCode::BAD_REQUEST,
            ErrorClass::Numerical => StatusCode::UNPROCESSABLE_ENTITY,
        };
        (status, Json(self.0)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Tasks and the motor model that applies to them.
type Inputs = (Vec<TaskTrajectory<f64>>, Option<MotorParams<f64>>);

fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| StageError::validation(Stage::Parse, e.to_string()).into())
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(v)| v)
        .map_err(|e| StageError::validation(Stage::Parse, e.body_text()).into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSummary {
    pub id: String,
    pub samples: usize,
    pub duration: f64,
    pub has_derivatives: bool,
}

impl TaskSummary {
    fn of(task: &TaskTrajectory<f64>) -> Self {
        TaskSummary {
            id: task.name.clone(),
            samples: task.len(),
            duration: task.duration(),
            has_derivatives: task.has_derivatives(),
        }
    }
}

async fn post_task(State(state): State<Arc<AppState>>, body: Bytes) -> Result<(StatusCode, Json<TaskSummary>), ApiError> {
    let mut doc: TaskDocument = parse(&body)?;
    let mut store = state.write();
    if doc.name.is_none() {
        let mut n = store.tasks.len() + 1;
        while store.tasks.contains_key(&format!("task{n}")) {
            n += 1;
        }
        doc.name = Some(format!("task{n}"));
    }
    let task = TaskTrajectory::from_document(doc, "task").at(Stage::Ingest)?;
    let summary = TaskSummary::of(&task);
    store.tasks.insert(task.name.clone(), task);
    state.persist(&store)?;
    Ok((StatusCode::CREATED, Json(summary)))
}

async fn list_tasks(State(state): State<Arc<AppState>>) -> Json<Vec<TaskSummary>> {
    Json(state.read().tasks.values().map(TaskSummary::of).collect())
}

async fn get_task(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<TaskDocument> {
    let store = state.read();
    let task = store
        .tasks
        .get(&id)
        .ok_or_else(|| StageError::not_found(Stage::Ingest, format!("unknown task id {id}")))?;
    Ok(Json(task.to_document()))
}

async fn post_motor(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<MotorParams<f64>> {
    let motor: MotorParams<f64> = parse(&body)?;
    motor.validate().at(Stage::Ingest)?;
    let mut store = state.write();
    store.motor = Some(motor);
    state.persist(&store)?;
    Ok(Json(motor))
}

async fn get_motor(State(state): State<Arc<AppState>>) -> ApiResult<MotorParams<f64>> {
    state
        .read()
        .motor
        .map(Json)
        .ok_or_else(|| StageError::not_found(Stage::Ingest, "no motor parameters stored").into())
}

/// Tasks and motor for a request, taken from the store under one read lock.
fn gather(
    state: &AppState,
    ids: Option<&[String]>,
    inline_motor: Option<MotorParams<f64>>,
    stage: Stage,
) -> Result<Inputs, ApiError> {
    let store = state.read();
    let tasks = store.pick(ids, stage)?;
    let motor = inline_motor.or(store.motor);
    drop(store);
    if let Some(m) = &motor {
        m.validate().at(stage)?;
    }
    let tasks = tasks
        .into_iter()
        .map(|t| prepare_task(t, motor.as_ref()))
        .collect::<pea_design::Result<Vec<_>>>()
        .at(stage)?;
    Ok((tasks, motor))
}

fn quadratics_for(
    tasks: &[TaskTrajectory<f64>],
    motor: Option<&MotorParams<f64>>,
    kind: ObjectiveKind,
    stage: Stage,
) -> StageResult<Vec<QuadraticObjective<f64>>> {
    tasks
        .iter()
        .map(|t| task_quadratic(t, motor, kind))
        .collect::<pea_design::Result<_>>()
        .at(stage)
}

fn default_kind() -> ObjectiveKind {
    ObjectiveKind::RmsEffort
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticsRequest {
    /// All stored tasks when absent.
    #[serde(default)]
    pub ids: Option<Vec<String>>,
    #[serde(default = "default_kind")]
    pub objective_kind: ObjectiveKind,
    /// Overrides the stored motor for this request.
    #[serde(default)]
    pub motor: Option<MotorParams<f64>>,
}

async fn post_quadratics(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Vec<QuadraticObjective<f64>>> {
    let req: QuadraticsRequest = parse(&body)?;
    let (tasks, motor) = gather(&state, req.ids.as_deref(), req.motor, Stage::Quadratics)?;
    Ok(Json(quadratics_for(&tasks, motor.as_ref(), req.objective_kind, Stage::Quadratics)?))
}

#[derive(Debug, Clone, Deserialize)]
pub struct RegionsQuery {
    /// Comma-separated task ids; all stored tasks when absent.
    #[serde(default)]
    pub ids: Option<String>,
    #[serde(default = "default_kind")]
    pub kind: ObjectiveKind,
    #[serde(default)]
    pub n: Option<usize>,
}

fn split_ids(ids: &Option<String>) -> Option<Vec<String>> {
    ids.as_ref()
        .map(|s| s.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect())
}

async fn get_regions(
    State(state): State<Arc<AppState>>,
    q: Result<Query<RegionsQuery>, QueryRejection>,
) -> ApiResult<Vec<RegionExport<f64>>> {
    let q = query(q)?;
    let n = q.n.unwrap_or(REGION_SAMPLES);
    if n < 3 {
        return Err(StageError::validation(Stage::Regions, format!("n must be at least 3, got {n}")).into());
    }
    let ids = split_ids(&q.ids);
    let (tasks, motor) = gather(&state, ids.as_deref(), None, Stage::Regions)?;
    let quads = quadratics_for(&tasks, motor.as_ref(), q.kind, Stage::Regions)?;
    Ok(Json(quads.iter().map(|o| export_region(o, n)).collect()))
}

/// Objective side of a problem request.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObjectiveSpec {
    /// A single task id.
    Task(String),
    /// Task ids with weights, combined by weighted sum.
    Weighted(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemRequest {
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(default = "default_kind")]
    pub objective_kind: ObjectiveKind,
    /// Include the motor rows of every task named in the request.
    #[serde(default)]
    pub feasibility: bool,
    #[serde(default)]
    pub motor: Option<MotorParams<f64>>,
}

/// Assembles the objective (single or weighted), the task constraints and
/// optionally the motor rows of every named task.
pub fn assemble_problem(
    req: &ProblemRequest,
    lookup: impl Fn(&[String]) -> Result<Inputs, ApiError>,
) -> Result<DesignProblem<f64>, ApiError> {
    let (objective_ids, weights): (Vec<String>, Option<Vec<f64>>) = match &req.objective {
        ObjectiveSpec::Task(id) => (vec![id.clone()], None),
        ObjectiveSpec::Weighted(map) => (map.keys().cloned().collect(), Some(map.values().copied().collect())),
    };
    let mut ids = objective_ids.clone();
    ids.extend(req.constraints.iter().cloned());
    let (tasks, motor) = lookup(&ids)?;
    let quads = quadratics_for(&tasks, motor.as_ref(), req.objective_kind, Stage::Quadratics)?;
    let (obj_quads, con_quads) = quads.split_at(objective_ids.len());
    let objective = match weights {
        None => obj_quads[0].clone(),
        Some(w) => weighted_sum(obj_quads, &TaskWeights::new(w).at(Stage::Quadratics)?).at(Stage::Quadratics)?,
    };
    let mut problem = DesignProblem::new(objective).with_constraints(con_quads.to_vec());
    if req.feasibility {
        let motor = motor.ok_or_else(|| StageError::validation(Stage::Quadratics, "feasibility rows need a motor"))?;
        let mut seen = std::collections::BTreeSet::new();
        let distinct: Vec<TaskTrajectory<f64>> = tasks.into_iter().filter(|t| seen.insert(t.name.clone())).collect();
        let rows = feasibility_rows(&distinct, &motor, &Default::default()).at(Stage::Quadratics)?;
        problem = problem.with_linear(rows);
    }
    Ok(problem)
}

async fn post_problem(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<DesignProblem<f64>> {
    let req: ProblemRequest = parse(&body)?;
    let motor = req.motor;
    let problem = assemble_problem(&req, |ids| gather(&state, Some(ids), motor, Stage::Quadratics))?;
    Ok(Json(problem))
}

#[derive(Debug, Clone, Deserialize)]
pub struct SolveQuery {
    #[serde(default)]
    pub tol: Option<f64>,
}

async fn post_solve(q: Result<Query<SolveQuery>, QueryRejection>, body: Bytes) -> ApiResult<SolveReport<f64>> {
    let tol = query(q)?.tol.unwrap_or(1e-8);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(StageError::validation(Stage::Solve, format!("tol must be positive, got {tol}")).into());
    }
    let problem: DesignProblem<f64> = parse(&body)?;
    problem.validate().at(Stage::Solve)?;
    Ok(Json(solve(&problem, tol)?))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateRequest {
    pub x: DesignPoint<f64>,
    #[serde(default)]
    pub ids: Option<Vec<String>>,
    /// Cost used for the membership report.
    #[serde(default = "default_kind")]
    pub objective_kind: ObjectiveKind,
    #[serde(default)]
    pub motor: Option<MotorParams<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateResponse {
    pub metrics: Vec<TaskMetrics<f64>>,
    pub membership: MembershipReport<f64>,
}

/// Metrics of every task at `x` plus benefit-region membership.
pub fn evaluate_tasks(
    x: &DesignPoint<f64>,
    tasks: &[TaskTrajectory<f64>],
    motor: Option<&MotorParams<f64>>,
    kind: ObjectiveKind,
) -> StageResult<EvaluateResponse> {
    let metrics = tasks
        .iter()
        .map(|t| evaluate_design(x, t, motor))
        .collect::<pea_design::Result<_>>()
        .at(Stage::Evaluate)?;
    let quads = quadratics_for(tasks, motor, kind, Stage::Evaluate)?;
    Ok(EvaluateResponse {
        metrics,
        membership: common_benefit(&quads, x),
    })
}

async fn post_evaluate(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<EvaluateResponse> {
    let req: EvaluateRequest = parse(&body)?;
    if !req.x.is_finite() {
        return Err(StageError::validation(Stage::Evaluate, "x must be finite").into());
    }
    let (tasks, motor) = gather(&state, req.ids.as_deref(), req.motor, Stage::Evaluate)?;
    Ok(Json(evaluate_tasks(&req.x, &tasks, motor.as_ref(), req.objective_kind)?))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/tasks", post(post_task).get(list_tasks))
        .route("/tasks/{id}", get(get_task))
        .route("/motor", post(post_motor).get(get_motor))
        .route("/quadratics", post(post_quadratics))
        .route("/regions", get(get_regions))
        .route("/problem", post(post_problem))
        .route("/solve", post(post_solve))
        .route("/evaluate", post(post_evaluate))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state)
}

/// Binds `addr` and serves until interrupted. A snapshot file, when given,
/// seeds the store if it exists and is rewritten after every change.
pub async fn serve(addr: SocketAddr, snapshot: Option<PathBuf>) -> std::io::Result<()> {
    let store = match &snapshot {
        Some(path) if path.exists() => Store::load_snapshot(path).map_err(|e| std::io::Error::other(e.to_string()))?,
        _ => Store::default(),
    };
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(store, snapshot)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
