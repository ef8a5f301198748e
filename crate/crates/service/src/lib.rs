//! HTTP facade over the scheduling engine.
//!
//! Every response body is canonical compact JSON (or DOT for graph
//! exports) and every problem-scoped response carries the schedule
//! revision, both as a `revision` field and as an `x-revision` header.

mod error;
mod openapi;
pub mod store;

use std::sync::Arc;
use std::time::Duration;

use argwf_core::builders::{self, AfKind};
use argwf_core::cost::cost_report;
use argwf_core::exec::{Budget, Execution};
use argwf_core::explain::{explain_capped, DEFAULT_CAP};
use argwf_core::format::{self, Style};
use argwf_core::moves::apply_move;
use argwf_core::solver::{brute_force_with, local_search, SearchOptions, TraceStep};
use argwf_core::{ProblemInstance, Schedule};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderName, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::Router;
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::{Any, CorsLayer};

pub use error::ApiError;
pub use store::Store;

pub const REVISION_HEADER: &str = "x-revision";

/// Default deadline for `POST /problems/{id}/optimize`.
pub const OPTIMIZE_DEADLINE: Duration = Duration::from_secs(10);

#[derive(Clone)]
pub struct AppState {
    store: Arc<Store>,
    deadline: Duration,
}

impl AppState {
    pub fn new(store: Store) -> Self {
        Self {
            store: Arc::new(store),
            deadline: OPTIMIZE_DEADLINE,
        }
    }

    pub fn with_deadline(mut self, deadline: Duration) -> Self {
        self.deadline = deadline;
        self
    }
}

pub fn router(state: AppState) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods(Any)
        .allow_headers(Any)
        .expose_headers([HeaderName::from_static(REVISION_HEADER)]);
    Router::new()
        .route("/spec", get(spec))
        .route("/problems", post(create))
        .route("/problems/{id}", get(fetch))
        .route("/problems/{id}/schedule", put(replace_schedule))
        .route("/problems/{id}/validate", post(validate))
        .route("/problems/{id}/optimize", post(optimize))
        .route("/problems/{id}/moves", post(apply))
        .route("/problems/{id}/af/{kind}", get(framework))
        .route("/problems/{id}/cost", get(cost))
        .layer(cors)
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

pub(crate) fn reply(status: StatusCode, revision: Option<u64>, body: &Value) -> Response {
    let mut res = (status, format::to_canonical(body, Style::Compact)).into_response();
    let headers = res.headers_mut();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
    if let Some(r) = revision {
        headers.insert(REVISION_HEADER, HeaderValue::from(r));
    }
    res
}

fn ok(revision: u64, mut body: Value) -> Response {
    body["revision"] = json!(revision);
    reply(StatusCode::OK, Some(revision), &body)
}

fn entry(state: &AppState, id: &str) -> Result<store::Entry, ApiError> {
    state.store.get(id).ok_or_else(|| ApiError::not_found(id))
}

fn report(inst: &ProblemInstance, sched: &Schedule) -> Value {
    format::report_to_value(inst, &explain_capped(inst, sched, DEFAULT_CAP))
}

async fn spec() -> Response {
    reply(StatusCode::OK, None, &openapi::document())
}

async fn create(State(state): State<AppState>, body: String) -> Result<Response, ApiError> {
    let problem = format::parse_problem(&body).map_err(ApiError::format)?;
    let (id, e) = state.store.insert(problem);
    let body = json!({"id": id, "revision": e.revision});
    Ok(reply(StatusCode::CREATED, Some(e.revision), &body))
}

async fn fetch(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let e = entry(&state, &id)?;
    Ok(ok(
        e.revision,
        json!({
            "id": id,
            "problem": format::problem_to_value(&e.problem),
            "schedule": format::schedule_to_value(&e.problem, &e.schedule),
        }),
    ))
}

#[derive(Deserialize)]
struct RevisionQuery {
    revision: Option<u64>,
}

fn commit(state: &AppState, id: &str, expected: Option<u64>, f: impl FnOnce(&store::Entry) -> Result<Schedule, ApiError>) -> Result<store::Entry, ApiError> {
    match state.store.update(id, expected, f)? {
        store::Update::Missing => Err(ApiError::not_found(id)),
        store::Update::Stale { current } => Err(ApiError::stale(expected.unwrap_or_default(), current)),
        store::Update::Done(e) => Ok(e),
    }
}

/// Replaces the schedule; `?revision=` makes the replacement conditional.
async fn replace_schedule(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<RevisionQuery>,
    body: String,
) -> Result<Response, ApiError> {
    let e = commit(&state, &id, q.revision, |e| {
        format::parse_schedule(&e.problem, &body).map_err(ApiError::format)
    })?;
    Ok(ok(e.revision, json!({"schedule": format::schedule_to_value(&e.problem, &e.schedule)})))
}

async fn validate(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let e = entry(&state, &id)?;
    Ok(ok(e.revision, report(&e.problem, &e.schedule)))
}

#[derive(Deserialize)]
struct MoveRequest {
    revision: u64,
    #[serde(rename = "move")]
    action: Value,
}

async fn apply(State(state): State<AppState>, Path(id): Path<String>, body: String) -> Result<Response, ApiError> {
    let req: MoveRequest = serde_json::from_str(&body).map_err(|e| ApiError::invalid(format!("move request: {e}")))?;
    let e = commit(&state, &id, Some(req.revision), |e| {
        let mv = format::move_from_value(&e.problem, req.action).map_err(ApiError::format)?;
        apply_move(&e.schedule, &mv).map_err(|err| ApiError::engine(&e.problem, err))
    })?;
    let mut body = report(&e.problem, &e.schedule);
    body["schedule"] = format::schedule_to_value(&e.problem, &e.schedule);
    body["cost"] = cost_report(&e.problem, &e.schedule).map_or(Value::Null, |c| format::cost_report_to_value(&e.problem, &c));
    Ok(ok(e.revision, body))
}

async fn cost(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let e = entry(&state, &id)?;
    let c = cost_report(&e.problem, &e.schedule).map_err(|err| ApiError::engine(&e.problem, err))?;
    Ok(ok(e.revision, format::cost_report_to_value(&e.problem, &c)))
}

#[derive(Deserialize)]
struct FormatQuery {
    format: Option<String>,
}

async fn framework(
    State(state): State<AppState>,
    Path((id, kind)): Path<(String, String)>,
    Query(q): Query<FormatQuery>,
) -> Result<Response, ApiError> {
    let e = entry(&state, &id)?;
    let kind = AfKind::parse(&kind).ok_or_else(|| ApiError::invalid(format!("unknown framework {kind:?}")))?;
    let g = builders::build(kind, &e.problem, &e.schedule);
    let ext = builders::extension(kind, &e.problem, &e.schedule);
    match q.format.as_deref().unwrap_or("json") {
        "json" => {
            let mut body = format::af_to_value(&e.problem, &g, &ext);
            body["kind"] = json!(kind.as_str());
            Ok(ok(e.revision, body))
        }
        "dot" => {
            let mut res = g.to_dot(&e.problem, Some(&ext)).into_response();
            let headers = res.headers_mut();
            headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("text/vnd.graphviz"));
            headers.insert(REVISION_HEADER, HeaderValue::from(e.revision));
            Ok(res)
        }
        other => Err(ApiError::invalid(format!("unknown format {other:?}"))),
    }
}

#[derive(Deserialize)]
struct OptimizeQuery {
    mode: Option<String>,
}

struct Optimized {
    schedule: Schedule,
    trace: Vec<TraceStep>,
    completed: bool,
}

fn run_optimizer(inst: &ProblemInstance, current: &Schedule, exact: bool, budget: Budget) -> argwf_core::Result<Optimized> {
    if exact {
        let sol = brute_force_with(inst, Execution::default(), &budget)?;
        return Ok(Optimized {
            schedule: sol.schedule,
            trace: Vec::new(),
            completed: true,
        });
    }
    // the stored schedule seeds the search when it assigns every job once
    let usable = current.structural_problems(inst).is_empty() && current.is_feasible(inst.num_jobs());
    let opts = SearchOptions {
        budget,
        ..SearchOptions::default()
    };
    let out = local_search(inst, usable.then_some(current), &opts)?;
    Ok(Optimized {
        schedule: out.schedule,
        trace: out.trace,
        completed: out.completed,
    })
}

/// Runs the optimizer on the stored state without changing it.
async fn optimize(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<OptimizeQuery>,
) -> Result<Response, ApiError> {
    let e = entry(&state, &id)?;
    let exact = match q.mode.as_deref().unwrap_or("local") {
        "local" => false,
        "exact" => true,
        other => return Err(ApiError::invalid(format!("unknown mode {other:?}"))),
    };
    let budget = Budget::with_timeout(state.deadline);
    let (inst, current) = (e.problem.clone(), e.schedule.clone());
    let result = tokio::task::spawn_blocking(move || run_optimizer(&inst, &current, exact, budget))
        .await
        .map_err(|err| ApiError::invalid(format!("optimizer failed: {err}")))?;
    let out = result.map_err(|err| {
        let mut api = ApiError::engine(&e.problem, err);
        api.body["revision"] = json!(e.revision);
        if api.body["error"] == "timeout" {
            api.body["trace"] = json!([]);
        }
        api
    })?;
    let inst = &e.problem;
    let mut body = json!({
        "mode": if exact { "exact" } else { "local" },
        "schedule": format::schedule_to_value(inst, &out.schedule),
        "trace": format::trace_to_value(inst, &out.trace),
    });
    if !out.completed {
        body["error"] = json!("timeout");
        body["message"] = json!("deadline reached before the search finished; the trace is partial");
        body["revision"] = json!(e.revision);
        return Ok(reply(StatusCode::UNPROCESSABLE_ENTITY, Some(e.revision), &body));
    }
    body["cost"] = cost_report(inst, &out.schedule).map_or(Value::Null, |c| format::cost_report_to_value(inst, &c));
    Ok(ok(e.revision, body))
}
