//! JSON over HTTP. Every error body is `{"code": ..., "message": ...}`, plus
//! `field`/`line`/`column` for parse errors.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::header;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use bevalkit_core::eval::EvalParams;
use bevalkit_core::pipeline::PipelineReport;
use bevalkit_core::rules::Clock;
use bevalkit_core::store::{Filter, Group, Status, Workspace};
use bevalkit_core::syntax::render;
use serde::{Deserialize, Serialize};
use tokio::sync::OwnedMutexGuard;

use crate::error::ServiceError;
use crate::ops::{self, EvalRequest, EvalResponse, PipelineRequest};

/// Upper bound on any single evaluation requested over HTTP.
pub const TIMEOUT_CAP_MS: u64 = 60_000;

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    ws: Workspace,
    clock: Arc<dyn Clock>,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl AppState {
    pub fn new(ws: Workspace, clock: Arc<dyn Clock>) -> Self {
        AppState {
            inner: Arc::new(Inner {
                ws,
                clock,
                locks: Mutex::new(HashMap::new()),
            }),
        }
    }

    /// One mutation per component at a time; a second one is refused.
    fn lock(&self, component: &str) -> Result<OwnedMutexGuard<()>, ServiceError> {
        let lock = self
            .inner
            .locks
            .lock()
            .expect("lock table poisoned")
            .entry(component.to_string())
            .or_default()
            .clone();
        lock.try_lock_owned().map_err(|_| {
            ServiceError::Conflict(format!(
                "component '{component}' is being modified by another request"
            ))
        })
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/components", get(list_components))
        .route("/api/components/{c}/pos", get(list_pos))
        .route("/api/components/{c}/pipeline", post(pipeline))
        .route("/api/components/{c}/pmm", get(pmm))
        .route("/api/components/{c}/wd_pmm", get(wd_pmm))
        .route("/api/components/{c}/user_pass", get(user_pass))
        .route("/api/eval", post(eval))
        .with_state(state)
}

/// Sets the flag when dropped, which stops an evaluation whose request
/// future was abandoned (client gone).
struct CancelOnDrop(Arc<AtomicBool>);

impl Drop for CancelOnDrop {
    fn drop(&mut self) {
        self.0.store(true, Ordering::Relaxed);
    }
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ServiceError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(format!("worker failed: {e}")))?
}

fn json_body<T>(body: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    body.map(|Json(v)| v)
        .map_err(|e| ServiceError::BadRequest(e.body_text()))
}

#[derive(Serialize)]
struct ComponentSummary {
    name: String,
    module_path: String,
    total: usize,
    unproved: usize,
}

async fn list_components(State(st): State<AppState>) -> Result<Json<Vec<ComponentSummary>>, ServiceError> {
    let mut out = Vec::new();
    for name in st.inner.ws.list()? {
        let c = st.inner.ws.load(&name)?;
        out.push(ComponentSummary {
            total: c.pos.len(),
            unproved: c.list_pos(Filter::Unproved).len(),
            module_path: c.module_path,
            name,
        });
    }
    Ok(Json(out))
}

#[derive(Deserialize)]
struct PosQuery {
    filter: Option<String>,
}

#[derive(Serialize)]
struct PoView {
    name: String,
    group: Group,
    status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
    hypotheses: Vec<String>,
    goal: String,
}

async fn list_pos(
    State(st): State<AppState>,
    Path(c): Path<String>,
    query: Result<Query<PosQuery>, QueryRejection>,
) -> Result<Json<Vec<PoView>>, ServiceError> {
    let Query(query) = query.map_err(|e| ServiceError::BadRequest(e.body_text()))?;
    let filter: Filter = match query.filter {
        Some(f) => f.parse().map_err(ServiceError::BadRequest)?,
        None => Filter::All,
    };
    let component = st.inner.ws.load(&c)?;
    let pos = component
        .list_pos(filter)
        .into_iter()
        .map(|po| PoView {
            name: po.name.clone(),
            group: po.group,
            status: po.status,
            provenance: po.provenance.clone(),
            hypotheses: po.hypotheses.iter().map(render).collect(),
            goal: render(&po.goal),
        })
        .collect();
    Ok(Json(pos))
}

async fn eval(
    State(st): State<AppState>,
    body: Result<Json<EvalRequest>, JsonRejection>,
) -> Result<Json<EvalResponse>, ServiceError> {
    let req = json_body(body)?;
    let guard = match (&req.component, req.add_rule) {
        (Some(c), true) => Some(st.lock(c)?),
        _ => None,
    };
    let flag = Arc::new(AtomicBool::new(false));
    let _cancel = CancelOnDrop(flag.clone());
    let response = blocking(move || {
        let _guard = guard;
        ops::evaluate(
            Some(&st.inner.ws),
            &req,
            st.inner.clock.as_ref(),
            &flag,
            Some(TIMEOUT_CAP_MS),
        )
    })
    .await?;
    Ok(Json(response))
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct PipelineBody {
    params: Option<EvalParams>,
    params_text: Option<String>,
    emit_rules: bool,
    forces_only: bool,
}

async fn pipeline(
    State(st): State<AppState>,
    Path(c): Path<String>,
    body: Result<Json<PipelineBody>, JsonRejection>,
) -> Result<Json<PipelineReport>, ServiceError> {
    let body = json_body(body)?;
    let mut params = ops::resolve_params(body.params.as_ref(), body.params_text.as_deref())?;
    params.timeout_ms = params.timeout_ms.min(TIMEOUT_CAP_MS);
    if !st.inner.ws.exists(&c) {
        return Err(ServiceError::NotFound(format!("component '{c}'")));
    }
    let guard = st.lock(&c)?;
    let report = blocking(move || {
        let _guard = guard;
        ops::pipeline(
            &st.inner.ws,
            &c,
            &PipelineRequest {
                params: &params,
                emit_rules: body.emit_rules,
                forces_only: body.forces_only,
            },
            st.inner.clock.as_ref(),
        )
    })
    .await?;
    Ok(Json(report))
}

fn text_file(st: &AppState, c: &str, pick: fn(&bevalkit_core::store::Component) -> &String) -> Result<impl IntoResponse, ServiceError> {
    let component = st.inner.ws.load(c)?;
    Ok((
        [(header::CONTENT_TYPE, "text/plain; charset=utf-8")],
        pick(&component).clone(),
    ))
}

async fn pmm(State(st): State<AppState>, Path(c): Path<String>) -> Result<impl IntoResponse, ServiceError> {
    text_file(&st, &c, |c| &c.pmm_text)
}

async fn wd_pmm(State(st): State<AppState>, Path(c): Path<String>) -> Result<impl IntoResponse, ServiceError> {
    text_file(&st, &c, |c| &c.wd_pmm_text)
}

async fn user_pass(State(st): State<AppState>, Path(c): Path<String>) -> Result<impl IntoResponse, ServiceError> {
    text_file(&st, &c, |c| &c.user_pass_text)
}
