//! Routes and handlers. Bodies are JSON; errors are
//! `{"error": {"code": ..., "message": ...}}` with the status from
//! [`ServiceError::status`].

use std::convert::Infallible;
use std::sync::Arc;

use axum::body::Body;
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use futures_util::stream;
use navlearn_core::environment::{Environment, Zod};
use navlearn_core::eval::{format_table, mhd_resampled, summarize, MhdMode, MhdResult, MHD_STEP_M};
use navlearn_core::features::{FeatureDescriptor, FeatureSchema, LayerKind, SchemaPreset};
use navlearn_core::geometry::{Cell, GridGeometry, Point};
use navlearn_core::irl::{
    reward_map, train, BehaviorModel, Budget, DemoRecord, DemoSource, Init, InitMode, StopReason, TrainControl,
    TrainOptions, TrainProgress, DEFAULT_DEMO_MARGIN,
};
use navlearn_core::planner::{plan_baseline_cells, plan_ioc_cells, rasterize, BaselineParams, Provenance, Trajectory};
use navlearn_core::scenario::{generate_environment, run_trials, Behavior, ScenarioSpec, TrialOptions};
use navlearn_core::worlds;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{ServiceError, ServiceResult};
use crate::jobs::{Job, JobStatus, JobView, Jobs};
use crate::workspace::{Kind, Workspace};

/// Default wall-clock budget for a training job, in seconds.
pub const DEFAULT_BUDGET_S: f64 = 30.0;

#[derive(Clone)]
pub struct AppState {
    pub workspace: Arc<Workspace>,
    pub jobs: Arc<Jobs>,
}

impl AppState {
    pub fn new(workspace: Workspace) -> Self {
        Self {
            workspace: Arc::new(workspace),
            jobs: Arc::new(Jobs::default()),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(|| async { Json(json!({ "status": "ok" })) }))
        .route("/environments", get(list_environments).post(create_environment))
        .route("/environments/{id}", get(get_environment))
        .route("/environments/{id}/layers/{name}", get(get_layer))
        .route("/environments/{id}/features", get(get_feature))
        .route("/environments/{id}/reward", get(get_reward))
        .route("/environments/{id}/zods", put(put_zods))
        .route("/demos", get(list_demos).post(create_demo))
        .route("/demos/{id}", get(get_demo).delete(delete_demo))
        .route("/models", get(list_models))
        .route("/models/{id}", get(get_model))
        .route("/jobs", get(list_jobs).post(create_job))
        .route("/jobs/{id}", get(get_job))
        .route("/jobs/{id}/cancel", post(cancel_job))
        .route("/jobs/{id}/events", get(job_events))
        .route("/plans", post(create_plan))
        .route("/trajectories", get(list_trajectories).post(create_trajectory))
        .route("/trajectories/{id}", get(get_trajectory))
        .route("/mhd", get(get_mhd))
        .route("/reports", get(list_reports).post(create_report))
        .route("/reports/{id}", get(get_report))
        .route("/training-log", get(training_log))
        .with_state(state)
}

/// JSON body extractor whose rejections use the service error format.
pub struct JsonBody<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for JsonBody<T> {
    type Rejection = ServiceError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| JsonBody(v))
            .map_err(|e| ServiceError::BadRequest(e.body_text()))
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ServiceResult<T> + Send + 'static) -> ServiceResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
}

fn query<T: DeserializeOwned>(q: Result<Query<T>, axum::extract::rejection::QueryRejection>) -> ServiceResult<T> {
    q.map(|Query(v)| v).map_err(|e| ServiceError::BadRequest(e.body_text()))
}

fn json_text(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

#[derive(Serialize)]
struct IdList {
    ids: Vec<String>,
}

// ---- environments ----

#[derive(Serialize)]
struct LayerSummary {
    kind: LayerKind,
    cells: usize,
}

#[derive(Serialize)]
struct EnvironmentView {
    id: String,
    geometry: GridGeometry,
    seed: u64,
    zods: Vec<Zod>,
    layers: Vec<LayerSummary>,
    has_unknown: bool,
}

fn environment_view(id: &str, env: &Environment) -> EnvironmentView {
    EnvironmentView {
        id: id.to_string(),
        geometry: *env.geometry(),
        seed: env.seed(),
        zods: env.zods().to_vec(),
        layers: env
            .layers()
            .iter()
            .map(|l| LayerSummary {
                kind: l.kind(),
                cells: l.count(),
            })
            .collect(),
        has_unknown: env.unknown().is_some(),
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case")]
enum WorldKind {
    Road,
    Covert,
    Zod,
    ZodTraining,
}

#[derive(Deserialize)]
struct WorldRequest {
    kind: WorldKind,
    seed: u64,
    #[serde(default)]
    behavior: Option<Behavior>,
}

#[derive(Deserialize)]
struct NewEnvironment {
    id: Option<String>,
    spec: Option<ScenarioSpec>,
    world: Option<WorldRequest>,
}

async fn list_environments(State(s): State<AppState>) -> Json<IdList> {
    Json(IdList {
        ids: s.workspace.ids(Kind::Environment),
    })
}

async fn create_environment(
    State(s): State<AppState>,
    JsonBody(req): JsonBody<NewEnvironment>,
) -> ServiceResult<(StatusCode, Json<EnvironmentView>)> {
    let spec = match (req.spec, req.world) {
        (Some(spec), None) => spec,
        (None, Some(w)) => match w.kind {
            WorldKind::Road => worlds::road_world(w.seed),
            WorldKind::Covert => worlds::covert_world(w.seed, w.behavior.unwrap_or(Behavior::Covert)),
            WorldKind::Zod => worlds::zod_world(w.seed),
            WorldKind::ZodTraining => worlds::zod_training_world(w.seed),
        },
        _ => return Err(ServiceError::BadRequest("give exactly one of `spec` or `world`".into())),
    };
    let id = s.workspace.new_id(Kind::Environment, req.id.as_deref())?;
    let ws = s.workspace.clone();
    blocking(move || {
        let env = generate_environment(&spec)?;
        let env = ws.add_environment(&id, env)?;
        Ok((StatusCode::CREATED, Json(environment_view(&id, &env))))
    })
    .await
}

async fn get_environment(State(s): State<AppState>, Path(id): Path<String>) -> ServiceResult<Json<EnvironmentView>> {
    let env = s.workspace.environment(&id)?;
    Ok(Json(environment_view(&id, &env)))
}

/// Row-major value matrix; `rows[r][c]` is cell (c, r), `null` where undefined.
#[derive(Serialize)]
struct Matrix {
    name: String,
    geometry: GridGeometry,
    rows: Vec<Vec<Option<f64>>>,
}

fn matrix(name: String, geometry: GridGeometry, values: impl Fn(usize) -> Option<f64>) -> Matrix {
    let rows = (0..geometry.height)
        .map(|r| (0..geometry.width).map(|c| values(r * geometry.width + c)).collect())
        .collect();
    Matrix { name, geometry, rows }
}

async fn get_layer(
    State(s): State<AppState>,
    Path((id, name)): Path<(String, String)>,
) -> ServiceResult<Json<Matrix>> {
    let env = s.workspace.environment(&id)?;
    let g = *env.geometry();
    let m = match name.as_str() {
        "opacity" => {
            let o = env.opacity();
            matrix(name, g, |i| Some(o.values()[i]))
        }
        "unknown" => {
            let u = env.unknown().map(|u| u.cells().to_vec()).unwrap_or_else(|| vec![0; g.len()]);
            matrix(name, g, |i| Some(f64::from(u[i])))
        }
        _ => {
            let kind: LayerKind = name.parse()?;
            let l = env.layer(kind);
            matrix(name, g, |i| Some(f64::from(l.cells()[i])))
        }
    };
    Ok(Json(m))
}

#[derive(Deserialize)]
struct FeatureQuery {
    descriptor: FeatureDescriptor,
}

async fn get_feature(
    State(s): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<FeatureQuery>, axum::extract::rejection::QueryRejection>,
) -> ServiceResult<Json<Matrix>> {
    let q = query(q)?;
    let env = s.workspace.environment(&id)?;
    blocking(move || {
        let mut d = vec![q.descriptor];
        if q.descriptor != FeatureDescriptor::Bias {
            d.push(FeatureDescriptor::Bias);
        }
        let stack = env.stack(&FeatureSchema::new(d)?)?;
        let plane = stack.plane(0);
        Ok(Json(matrix(q.descriptor.to_string(), *env.geometry(), |i| Some(plane[i]))))
    })
    .await
}

#[derive(Deserialize)]
struct RewardQuery {
    model: String,
}

async fn get_reward(
    State(s): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<RewardQuery>, axum::extract::rejection::QueryRejection>,
) -> ServiceResult<Json<Matrix>> {
    let q = query(q)?;
    let env = s.workspace.environment(&id)?;
    let model = s.workspace.model(&q.model)?;
    blocking(move || {
        let rm = reward_map(&model, &env.stack(&model.schema)?)?;
        Ok(Json(matrix(format!("reward:{}", q.model), *env.geometry(), |i| {
            rm.passable()[i].then_some(rm.values()[i])
        })))
    })
    .await
}

#[derive(Deserialize)]
struct ZodSet {
    zods: Vec<Zod>,
}

async fn put_zods(
    State(s): State<AppState>,
    Path(id): Path<String>,
    JsonBody(req): JsonBody<ZodSet>,
) -> ServiceResult<Json<EnvironmentView>> {
    let env = s.workspace.environment(&id)?;
    let next = env.with_zods(req.zods)?;
    let env = s.workspace.replace_environment(&id, next)?;
    Ok(Json(environment_view(&id, &env)))
}

// ---- demonstrations ----

#[derive(Deserialize)]
struct NewDemo {
    id: Option<String>,
    environment: String,
    points: Vec<Point>,
    #[serde(default = "default_source")]
    source: DemoSource,
}

fn default_source() -> DemoSource {
    DemoSource::HumanUi
}

#[derive(Serialize)]
struct DemoView {
    id: String,
    source: DemoSource,
    /// Cell centers of the rasterized path.
    points: Vec<Point>,
    length_m: f64,
}

fn demo_trajectory(rec: &DemoRecord) -> ServiceResult<Trajectory> {
    Ok(Trajectory::from_cells(&rec.geometry()?, &rec.path, Provenance::GroundTruth)?)
}

fn demo_view(rec: &DemoRecord) -> ServiceResult<DemoView> {
    let traj = demo_trajectory(rec)?;
    Ok(DemoView {
        id: rec.id.clone(),
        source: rec.source,
        points: traj.points().to_vec(),
        length_m: traj.length(),
    })
}

async fn list_demos(State(s): State<AppState>) -> Json<IdList> {
    Json(IdList {
        ids: s.workspace.ids(Kind::Demo),
    })
}

async fn create_demo(
    State(s): State<AppState>,
    JsonBody(req): JsonBody<NewDemo>,
) -> ServiceResult<(StatusCode, Json<DemoView>)> {
    let env = s.workspace.environment(&req.environment)?;
    let cells = rasterize(env.geometry(), &req.points).map_err(|e| match e {
        navlearn_core::Error::InvalidTrajectory(_)
        | navlearn_core::Error::EmptyTrajectory
        | navlearn_core::Error::OutOfBounds(_) => ServiceError::MalformedPolyline(e.to_string()),
        e => e.into(),
    })?;
    if cells.len() < 2 {
        return Err(navlearn_core::Error::InvalidDemonstration("the polyline stays within one cell".into()).into());
    }
    if let Some(c) = cells.iter().find(|c| env.is_obstacle(**c)) {
        return Err(navlearn_core::Error::InvalidDemonstration(format!(
            "path enters obstacle cell ({}, {})",
            c.col, c.row
        ))
        .into());
    }
    let id = s.workspace.new_id(Kind::Demo, req.id.as_deref())?;
    let rec = DemoRecord::capture(&env, id, &cells, DEFAULT_DEMO_MARGIN, req.source)?;
    let rec = s.workspace.add_demo(rec)?;
    Ok((StatusCode::CREATED, Json(demo_view(&rec)?)))
}

async fn get_demo(State(s): State<AppState>, Path(id): Path<String>) -> ServiceResult<Json<DemoView>> {
    let rec = s.workspace.demo(&id)?;
    Ok(Json(demo_view(&rec)?))
}

async fn delete_demo(State(s): State<AppState>, Path(id): Path<String>) -> ServiceResult<StatusCode> {
    s.workspace.remove_demo(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

// ---- models and jobs ----

async fn list_models(State(s): State<AppState>) -> Json<IdList> {
    Json(IdList {
        ids: s.workspace.ids(Kind::Model),
    })
}

async fn get_model(State(s): State<AppState>, Path(id): Path<String>) -> ServiceResult<Response> {
    Ok(json_text(StatusCode::OK, s.workspace.model(&id)?.to_json()?))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SchemaArg {
    Preset(SchemaPreset),
    Descriptors(FeatureSchema),
}

impl SchemaArg {
    fn schema(self) -> FeatureSchema {
        match self {
            SchemaArg::Preset(p) => FeatureSchema::preset(p),
            SchemaArg::Descriptors(s) => s,
        }
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum InitArg {
    Warm,
    Random,
}

#[derive(Deserialize)]
struct NewJob {
    model: String,
    schema: Option<SchemaArg>,
    init: Option<InitArg>,
    seed: Option<u64>,
    budget_s: Option<f64>,
    max_iterations: Option<usize>,
    /// Defaults to every demonstration in the workspace.
    demos: Option<Vec<String>>,
}

async fn list_jobs(State(s): State<AppState>) -> Json<Vec<JobView>> {
    Json(s.jobs.list())
}

async fn create_job(
    State(s): State<AppState>,
    JsonBody(req): JsonBody<NewJob>,
) -> ServiceResult<(StatusCode, Json<JobView>)> {
    if !crate::workspace::valid_id(&req.model) {
        return Err(ServiceError::InvalidId(req.model));
    }
    let existing = s.workspace.model(&req.model).ok();
    let schema = match (&existing, req.schema.map(SchemaArg::schema)) {
        (Some(m), Some(schema)) if schema != m.schema => {
            return Err(navlearn_core::Error::SchemaMismatch(format!(
                "model `{}` uses a {}-feature schema that differs from the request",
                req.model,
                m.schema.dim()
            ))
            .into())
        }
        (Some(m), _) => m.schema.clone(),
        (None, Some(schema)) => schema,
        (None, None) => return Err(ServiceError::BadRequest("a new model needs a `schema`".into())),
    };
    let init = match (req.init, &existing) {
        (Some(InitArg::Random), _) | (None, None) => Init::Random {
            seed: req.seed.unwrap_or(0),
        },
        (_, Some(m)) => Init::Warm(m.theta.clone()),
        (Some(InitArg::Warm), None) => {
            return Err(ServiceError::BadRequest(format!(
                "model `{}` has no weights to warm-start from",
                req.model
            )))
        }
    };
    let budget_s = req.budget_s.unwrap_or(DEFAULT_BUDGET_S);
    if !(budget_s > 0.0 && budget_s.is_finite()) {
        return Err(navlearn_core::Error::InvalidBudget(format!("budget_s must be positive, got {budget_s}")).into());
    }
    let budget = Budget {
        max_iterations: req.max_iterations.unwrap_or(Budget::default().max_iterations),
        ..Budget::with_seconds(budget_s)
    };
    let demo_ids = req.demos.unwrap_or_else(|| s.workspace.ids(Kind::Demo));
    if demo_ids.is_empty() {
        return Err(navlearn_core::Error::NoDemonstrations.into());
    }
    let records = demo_ids
        .iter()
        .map(|id| s.workspace.demo(id))
        .collect::<ServiceResult<Vec<_>>>()?;
    let job = s.jobs.create(JobView {
        id: String::new(),
        model: req.model,
        init: match init {
            Init::Random { .. } => InitMode::Random,
            Init::Warm(_) => InitMode::Warm,
        },
        budget_s,
        max_iterations: budget.max_iterations,
        demo_ids,
        status: JobStatus::Queued,
        progress: None,
        stop_reason: None,
        error: None,
    })?;
    let view = job.view();
    let state = s.clone();
    tokio::task::spawn_blocking(move || run_job(&state, &job, &records, &schema, init, budget));
    Ok((StatusCode::ACCEPTED, Json(view)))
}

/// Bind, train and publish. The model is replaced only when training ends
/// without cancellation; the lock on the model is released before the
/// terminal status is announced.
fn run_job(s: &AppState, job: &Job, records: &[Arc<DemoRecord>], schema: &FeatureSchema, init: Init, budget: Budget) {
    job.set_status(JobStatus::Running, None, None);
    let view = job.view();
    let result = (|| -> ServiceResult<BehaviorModel> {
        let demos = records
            .iter()
            .map(|r| r.bind(schema))
            .collect::<navlearn_core::Result<Vec<_>>>()?;
        let mut on_progress = |p: &TrainProgress| job.record_progress(p);
        let control = TrainControl {
            cancel: Some(job.cancel_flag()),
            on_progress: Some(&mut on_progress),
        };
        Ok(train(&demos, schema, init, budget, TrainOptions::default(), control)?)
    })();
    let (status, stop, error, meta) = match result {
        Ok(model) if model.meta.stop_reason == StopReason::Cancelled => {
            (JobStatus::Cancelled, Some(StopReason::Cancelled), None, Some(model.meta))
        }
        Ok(model) => {
            let meta = model.meta.clone();
            match s.workspace.publish_model(&view.model, model) {
                Ok(_) => (JobStatus::Done, Some(meta.stop_reason), None, Some(meta)),
                Err(e) => (JobStatus::Failed, None, Some(e.to_string()), Some(meta)),
            }
        }
        Err(e) => (JobStatus::Failed, None, Some(e.to_string()), None),
    };
    let _ = s.workspace.append_event(&json!({
        "job": view.id,
        "model": view.model,
        "status": status,
        "init": view.init,
        "demo_ids": view.demo_ids,
        "budget_s": view.budget_s,
        "iterations": meta.as_ref().map(|m| m.iterations),
        "stop_reason": stop,
        "log_likelihood": meta.as_ref().map(|m| m.log_likelihood).filter(|v| v.is_finite()),
        "elapsed_s": meta.as_ref().map(|m| m.wall_clock_s),
        "error": error,
    }));
    s.jobs.release(job);
    job.set_status(status, stop, error);
}

async fn get_job(State(s): State<AppState>, Path(id): Path<String>) -> ServiceResult<Json<JobView>> {
    Ok(Json(s.jobs.get(&id)?.view()))
}

async fn cancel_job(State(s): State<AppState>, Path(id): Path<String>) -> ServiceResult<Json<JobView>> {
    let job = s.jobs.get(&id)?;
    job.request_cancel();
    Ok(Json(job.view()))
}

/// Line-delimited JSON: every event so far, then new ones as they happen,
/// ending after the terminal status line.
async fn job_events(State(s): State<AppState>, Path(id): Path<String>) -> ServiceResult<Response> {
    let job = s.jobs.get(&id)?;
    let rx = job.subscribe();
    let body = stream::unfold(Some((job, rx, 0usize)), |st| async move {
        let (job, mut rx, cursor) = st?;
        loop {
            rx.borrow_and_update();
            let (events, ended) = job.events_since(cursor);
            if !events.is_empty() {
                let mut chunk = String::new();
                for e in &events {
                    chunk.push_str(&serde_json::to_string(e).expect("events serialize"));
                    chunk.push('\n');
                }
                let next = (!ended).then_some((job, rx, cursor + events.len()));
                return Some((Ok::<_, Infallible>(chunk), next));
            }
            if ended || rx.changed().await.is_err() {
                return None;
            }
        }
    });
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], Body::from_stream(body)).into_response())
}

// ---- planning and trajectories ----

#[derive(Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum PlannerKind {
    Ioc,
    Baseline,
}

#[derive(Deserialize)]
struct NewPlan {
    id: Option<String>,
    environment: String,
    planner: PlannerKind,
    model: Option<String>,
    from: Point,
    to: Point,
    baseline: Option<BaselineParams>,
}

#[derive(Serialize)]
struct PlanView {
    id: String,
    provenance: Provenance,
    cells: Vec<Cell>,
    points: Vec<Point>,
    cost: f64,
    length_m: f64,
}

async fn create_plan(
    State(s): State<AppState>,
    JsonBody(req): JsonBody<NewPlan>,
) -> ServiceResult<(StatusCode, Json<PlanView>)> {
    let env = s.workspace.environment(&req.environment)?;
    let model = match (req.planner, &req.model) {
        (PlannerKind::Ioc, Some(m)) => Some(s.workspace.model(m)?),
        (PlannerKind::Ioc, None) => return Err(ServiceError::BadRequest("an IOC plan needs a `model`".into())),
        (PlannerKind::Baseline, _) => None,
    };
    let id = s.workspace.new_id(Kind::Trajectory, req.id.as_deref())?;
    let ws = s.workspace.clone();
    blocking(move || {
        let g = *env.geometry();
        let (from, to) = (g.cell_of(req.from), g.cell_of(req.to));
        for c in [from, to] {
            g.checked_index(c)?;
        }
        let (path, provenance) = match model {
            Some(m) => (plan_ioc_cells(&reward_map(&m, &env.stack(&m.schema)?)?, from, to)?, Provenance::Ioc),
            None => (
                plan_baseline_cells(&env.opacity(), from, to, &req.baseline.unwrap_or_default())?,
                Provenance::Baseline,
            ),
        };
        let traj = Trajectory::from_cells(&g, &path.cells, provenance)?;
        let view = PlanView {
            id: id.clone(),
            provenance,
            cells: path.cells,
            points: traj.points().to_vec(),
            cost: path.cost,
            length_m: traj.length(),
        };
        ws.add_trajectory(&id, traj)?;
        Ok((StatusCode::CREATED, Json(view)))
    })
    .await
}

#[derive(Serialize)]
struct TrajectoryView {
    id: String,
    provenance: Provenance,
    points: Vec<Point>,
    times: Option<Vec<f64>>,
    length_m: f64,
}

fn trajectory_view(id: &str, t: &Trajectory) -> TrajectoryView {
    TrajectoryView {
        id: id.to_string(),
        provenance: t.provenance(),
        points: t.points().to_vec(),
        times: t.times().map(<[f64]>::to_vec),
        length_m: t.length(),
    }
}

#[derive(Deserialize)]
struct NewTrajectory {
    id: Option<String>,
    provenance: Provenance,
    points: Vec<Point>,
    times: Option<Vec<f64>>,
}

async fn list_trajectories(State(s): State<AppState>) -> Json<IdList> {
    Json(IdList {
        ids: s.workspace.ids(Kind::Trajectory),
    })
}

async fn create_trajectory(
    State(s): State<AppState>,
    JsonBody(req): JsonBody<NewTrajectory>,
) -> ServiceResult<(StatusCode, Json<TrajectoryView>)> {
    let traj = Trajectory::new(req.points, req.times, req.provenance)
        .map_err(|e| ServiceError::MalformedPolyline(e.to_string()))?;
    let id = s.workspace.new_id(Kind::Trajectory, req.id.as_deref())?;
    let traj = s.workspace.add_trajectory(&id, traj)?;
    Ok((StatusCode::CREATED, Json(trajectory_view(&id, &traj))))
}

async fn get_trajectory(State(s): State<AppState>, Path(id): Path<String>) -> ServiceResult<Json<TrajectoryView>> {
    let traj = s.workspace.trajectory(&id)?;
    Ok(Json(trajectory_view(&id, &traj)))
}

#[derive(Deserialize)]
struct MhdQuery {
    candidate: String,
    reference: String,
    #[serde(default)]
    mode: MhdMode,
    step: Option<f64>,
}

/// A stored trajectory, or else a demonstration's path.
fn resolve_trajectory(ws: &Workspace, id: &str) -> ServiceResult<Trajectory> {
    match ws.trajectory(id) {
        Ok(t) => Ok((*t).clone()),
        Err(_) => match ws.demo(id) {
            Ok(d) => demo_trajectory(&d),
            Err(_) => Err(ServiceError::not_found("trajectory", id)),
        },
    }
}

async fn get_mhd(
    State(s): State<AppState>,
    q: Result<Query<MhdQuery>, axum::extract::rejection::QueryRejection>,
) -> ServiceResult<Json<serde_json::Value>> {
    let q = query(q)?;
    let a = resolve_trajectory(&s.workspace, &q.candidate)?;
    let b = resolve_trajectory(&s.workspace, &q.reference)?;
    let step = q.step.unwrap_or(MHD_STEP_M);
    let d = mhd_resampled(&a, &b, step, q.mode)?;
    Ok(Json(json!({
        "candidate": q.candidate,
        "reference": q.reference,
        "mode": q.mode,
        "step_m": step,
        "mhd_m": d,
    })))
}

// ---- reports ----

#[derive(Deserialize)]
struct NewReport {
    id: Option<String>,
    spec: ScenarioSpec,
    model: String,
    trials: Option<usize>,
}

#[derive(Serialize)]
struct ReportView {
    id: String,
    results: Vec<MhdResult>,
    table: String,
}

fn report_view(ws: &Workspace, id: &str) -> ServiceResult<ReportView> {
    let results = summarize(&ws.report_metrics(id)?)?;
    Ok(ReportView {
        id: id.to_string(),
        table: format_table(&results),
        results,
    })
}

async fn list_reports(State(s): State<AppState>) -> Json<IdList> {
    Json(IdList {
        ids: s.workspace.ids(Kind::Report),
    })
}

async fn create_report(
    State(s): State<AppState>,
    JsonBody(mut req): JsonBody<NewReport>,
) -> ServiceResult<(StatusCode, Json<ReportView>)> {
    let model = s.workspace.model(&req.model)?;
    let id = s.workspace.new_id(Kind::Report, req.id.as_deref())?;
    if req.trials.is_some() {
        req.spec.trials = req.trials;
    }
    let ws = s.workspace.clone();
    blocking(move || {
        let env = generate_environment(&req.spec)?;
        let report = run_trials(&req.spec, &env, &model, &TrialOptions::default())?;
        ws.add_report(&id, &report)?;
        Ok((StatusCode::CREATED, Json(report_view(&ws, &id)?)))
    })
    .await
}

async fn get_report(State(s): State<AppState>, Path(id): Path<String>) -> ServiceResult<Json<ReportView>> {
    Ok(Json(report_view(&s.workspace, &id)?))
}

async fn training_log(State(s): State<AppState>) -> ServiceResult<Json<Vec<serde_json::Value>>> {
    Ok(Json(s.workspace.events()?))
}
