//! HTTP routes and handlers. Field names and codes are listed in docs/API.md.

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::extract::rejection::{PathRejection, QueryRejection};
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chairsearch_core::dataset::ChairId;
use chairsearch_core::dictionary::Dictionary;
use chairsearch_core::engine::Engine;
use chairsearch_core::index::ResultSet;
use chairsearch_core::query::AttributeVector;
use chairsearch_core::session::{
    Clock, ColorSet, DescriptorEdit, LevelDelta, Modality, Mode, Outcome, Phase, Session, SessionConfig,
    SessionState,
};
use chairsearch_core::sketch::{Sketch, Stroke, VIEW_COUNT};
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::error::{Result, ServiceError};
use crate::registry::{lock, LiveSession, Registry, SessionHandle, SessionLog, SnapshotCache};

const SNAPSHOT_CACHE_ENTRIES: usize = 4096;

/// Shared, immutable engine plus the session registry.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    engine: Arc<Engine>,
    clock: Arc<dyn Clock>,
    budget_ms: u64,
    log_dir: Option<PathBuf>,
    sessions: Registry,
    snapshots: SnapshotCache,
    counter: AtomicU64,
}

impl AppState {
    /// `log_dir = None` keeps sessions in memory only.
    pub fn new(engine: Arc<Engine>, clock: Arc<dyn Clock>, budget_ms: u64, log_dir: Option<PathBuf>) -> Self {
        AppState {
            inner: Arc::new(Inner {
                engine,
                clock,
                budget_ms,
                log_dir,
                sessions: Registry::default(),
                snapshots: SnapshotCache::new(SNAPSHOT_CACHE_ENTRIES),
                counter: AtomicU64::new(0),
            }),
        }
    }

    pub fn engine(&self) -> &Arc<Engine> {
        &self.inner.engine
    }

    pub fn session(&self, id: &str) -> Result<SessionHandle> {
        self.inner.sessions.get(id)
    }

    pub fn snapshot_cache(&self) -> &SnapshotCache {
        &self.inner.snapshots
    }

    fn new_session_id(&self) -> String {
        loop {
            let n = self.inner.counter.fetch_add(1, Ordering::Relaxed);
            let id = format!("s{n:05}-{:08x}", rand::rng().random::<u32>());
            if !self.inner.sessions.contains(&id) {
                return id;
            }
        }
    }

    /// Records due timeouts in every session and its log.
    pub fn reap_timeouts(&self) {
        for handle in self.inner.sessions.handles() {
            if let Ok(mut live) = handle.try_lock() {
                live.session.poll();
                live.sync_log();
            }
        }
    }

    pub fn create_session(&self, req: CreateSession) -> Result<StateView> {
        let target = match (req.target, req.random_target) {
            (Some(t), false) => t,
            (None, true) => {
                let ids = self.engine().index().chair_ids();
                ids[rand::rng().random_range(0..ids.len())]
            }
            (Some(_), true) => return Err(ServiceError::Invalid("give either target or random_target".into())),
            (None, false) => return Err(ServiceError::Invalid("target or random_target is required".into())),
        };
        let mut config = SessionConfig {
            budget_ms: self.inner.budget_ms,
            ..SessionConfig::default()
        };
        if let Some(n) = req.n_gram {
            config.n_gram = n;
        }
        let id = self.new_session_id();
        let session = Session::begin(self.engine().clone(), self.inner.clock.clone(), id, target, req.mode, config)?;
        let log = match &self.inner.log_dir {
            Some(dir) => SessionLog::create(dir, &session),
            None => SessionLog::disabled(),
        };
        let handle = self.inner.sessions.insert(LiveSession { session, log });
        let live = lock(&handle);
        Ok(StateView::of(&live))
    }

    /// Runs a mutating operation under the session's lock, then appends
    /// the new events to its log.
    async fn mutate<T, F>(&self, id: &str, op: F) -> Result<T>
    where
        T: Send + 'static,
        F: FnOnce(&mut LiveSession) -> Result<T> + Send + 'static,
    {
        let handle = self.session(id)?;
        tokio::task::spawn_blocking(move || {
            let mut live = lock(&handle);
            let out = op(&mut live);
            live.sync_log();
            out
        })
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
    }
}

// ---------------------------------------------------------------- wire types

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub mode: Mode,
    #[serde(default)]
    pub target: Option<ChairId>,
    #[serde(default)]
    pub random_target: bool,
    #[serde(default)]
    pub n_gram: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoiceRequest {
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SketchRequest {
    pub strokes: Vec<Stroke>,
    #[serde(default)]
    pub include_model: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectRequest {
    pub rank: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltasRequest {
    #[serde(default)]
    pub levels: Vec<LevelDelta>,
    #[serde(default)]
    pub colors: Vec<ColorSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelEntry {
    pub rank: usize,
    pub chair_id: ChairId,
    pub distance: f64,
    pub snapshot_url: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InFlight {
    pub query_id: u32,
    pub modality: Modality,
    pub phase: Phase,
    pub started_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateView {
    pub session_id: String,
    pub mode: Mode,
    pub state: SessionState,
    pub target: ChairId,
    pub n_gram: usize,
    pub budget_ms: u64,
    pub elapsed_ms: u64,
    pub remaining_ms: u64,
    pub current_chair: ChairId,
    pub current_snapshot_url: String,
    pub target_snapshot_url: String,
    pub in_flight: Option<InFlight>,
    /// Results awaiting selection; empty otherwise.
    pub panel: Vec<PanelEntry>,
    pub descriptor: AttributeVector,
    pub query_count: usize,
    pub log_degraded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub query_id: u32,
    pub modality: Modality,
    pub panel: Vec<PanelEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectResponse {
    pub chair_id: ChairId,
    pub state: SessionState,
    pub descriptor: AttributeVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorResponse {
    pub descriptor: AttributeVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeResponse {
    pub session_id: String,
    pub outcome: Outcome,
    pub log_degraded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub mode: Mode,
    pub state: SessionState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub chairs: usize,
    pub manifest_checksum: String,
    pub index_digest: String,
}

pub fn snapshot_url(chair_id: ChairId, view: usize) -> String {
    format!("/api/chairs/{chair_id}/views/{view}")
}

fn panel(results: &ResultSet) -> Vec<PanelEntry> {
    results
        .neighbors
        .iter()
        .enumerate()
        .map(|(rank, n)| PanelEntry {
            rank,
            chair_id: n.chair_id,
            distance: n.distance,
            snapshot_url: snapshot_url(n.chair_id, 0),
        })
        .collect()
}

impl StateView {
    /// Read-only projection; an expired budget shows as timed out before
    /// any operation records it.
    pub fn of(live: &LiveSession) -> StateView {
        let s = &live.session;
        let state = s.state();
        let pending = s.in_flight().filter(|_| state == SessionState::Active);
        StateView {
            session_id: s.id().into(),
            mode: s.mode(),
            state,
            target: s.target(),
            n_gram: s.config().n_gram,
            budget_ms: s.config().budget_ms,
            elapsed_ms: s.elapsed_ms(),
            remaining_ms: s.remaining_ms(),
            current_chair: s.current(),
            current_snapshot_url: snapshot_url(s.current(), 0),
            target_snapshot_url: format!("/api/sessions/{}/target", s.id()),
            in_flight: pending.map(|r| InFlight {
                query_id: r.query_id,
                modality: r.modality,
                phase: r.phase,
                started_ms: r.started_ms,
            }),
            panel: pending.and_then(|r| r.results.as_ref()).map(panel).unwrap_or_default(),
            descriptor: s.descriptor().clone(),
            query_count: s.log().iter().filter(|r| r.accepted()).count(),
            log_degraded: live.log.is_degraded(),
        }
    }
}

// ---------------------------------------------------------------- extractors

/// JSON body whose rejections use the service error format.
pub struct ApiJson<T>(pub T);

impl<S, T> FromRequest<S> for ApiJson<T>
where
    T: DeserializeOwned,
    S: Send + Sync,
{
    type Rejection = ServiceError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(ApiJson(v)),
            Err(rej) => Err(ServiceError::Malformed(rej.body_text())),
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct ViewQuery {
    #[serde(default)]
    pub view: usize,
}

fn check_view(view: usize) -> Result<usize> {
    if view < VIEW_COUNT {
        Ok(view)
    } else {
        Err(ServiceError::Invalid(format!("view {view} outside 0..{VIEW_COUNT}")))
    }
}

fn png(bytes: Arc<Vec<u8>>) -> Response {
    ([(header::CONTENT_TYPE, "image/png")], bytes.as_ref().clone()).into_response()
}

// ---------------------------------------------------------------- handlers

async fn health(State(app): State<AppState>) -> Json<Health> {
    let e = app.engine();
    Json(Health {
        status: "ok".into(),
        chairs: e.index().len(),
        manifest_checksum: e.manifest_checksum().into(),
        index_digest: e.index().digest(),
    })
}

async fn dictionary(State(app): State<AppState>) -> Json<Dictionary> {
    Json(app.engine().dictionary().clone())
}

async fn create_session(
    State(app): State<AppState>,
    ApiJson(req): ApiJson<CreateSession>,
) -> Result<(StatusCode, Json<StateView>)> {
    let view = tokio::task::spawn_blocking(move || app.create_session(req))
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))??;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn list_sessions(State(app): State<AppState>) -> Json<Vec<SessionSummary>> {
    let mut out = Vec::new();
    for id in app.inner.sessions.ids() {
        if let Ok(h) = app.session(&id) {
            let live = lock(&h);
            out.push(SessionSummary {
                session_id: id,
                mode: live.session.mode(),
                state: live.session.state(),
            });
        }
    }
    Json(out)
}

async fn get_state(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<StateView>> {
    let handle = app.session(&id)?;
    let live = lock(&handle);
    Ok(Json(StateView::of(&live)))
}

async fn submit_voice(
    State(app): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<VoiceRequest>,
) -> Result<Json<QueryResponse>> {
    let r = app
        .mutate(&id, move |live| {
            let results = live.session.submit_voice(&req.text)?;
            Ok(query_response(&live.session, &results))
        })
        .await?;
    Ok(Json(r))
}

async fn submit_sketch(
    State(app): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<SketchRequest>,
) -> Result<Json<QueryResponse>> {
    let r = app
        .mutate(&id, move |live| {
            let sketch = Sketch { strokes: req.strokes };
            let results = live.session.submit_sketch(&sketch, req.include_model)?;
            Ok(query_response(&live.session, &results))
        })
        .await?;
    Ok(Json(r))
}

fn query_response(session: &Session, results: &ResultSet) -> QueryResponse {
    let rec = session.log().last().expect("accepted query is logged");
    QueryResponse {
        query_id: rec.query_id,
        modality: rec.modality,
        panel: panel(results),
    }
}

async fn select(
    State(app): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<SelectRequest>,
) -> Result<Json<SelectResponse>> {
    let r = app
        .mutate(&id, move |live| {
            let chair_id = live.session.select(req.rank)?;
            Ok(SelectResponse {
                chair_id,
                state: live.session.state(),
                descriptor: live.session.descriptor().clone(),
            })
        })
        .await?;
    Ok(Json(r))
}

async fn abandon(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<OutcomeResponse>> {
    let r = app
        .mutate(&id, |live| {
            live.session.abandon()?;
            Ok(live.session.score())
        })
        .await?;
    outcome_of(&app, &id, r)
}

fn outcome_of(app: &AppState, id: &str, outcome: Outcome) -> Result<Json<OutcomeResponse>> {
    let handle = app.session(id)?;
    let degraded = lock(&handle).log.is_degraded();
    Ok(Json(OutcomeResponse {
        session_id: id.into(),
        outcome,
        log_degraded: degraded,
    }))
}

async fn edit(app: &AppState, id: &str, edit: DescriptorEdit) -> Result<Json<DescriptorResponse>> {
    let descriptor = app.mutate(id, move |live| Ok(live.session.edit_descriptor(edit)?)).await?;
    Ok(Json(DescriptorResponse { descriptor }))
}

async fn descriptor_deltas(
    State(app): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<DeltasRequest>,
) -> Result<Json<DescriptorResponse>> {
    edit(&app, &id, DescriptorEdit::Deltas { levels: req.levels, colors: req.colors }).await
}

async fn descriptor_reset(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<DescriptorResponse>> {
    edit(&app, &id, DescriptorEdit::Reset).await
}

async fn descriptor_sync(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<DescriptorResponse>> {
    edit(&app, &id, DescriptorEdit::Sync).await
}

async fn outcome(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<OutcomeResponse>> {
    let handle = app.session(&id)?;
    let score = lock(&handle).session.score();
    outcome_of(&app, &id, score)
}

async fn target_snapshot(
    State(app): State<AppState>,
    Path(id): Path<String>,
    query: Result<Query<ViewQuery>, QueryRejection>,
) -> Result<Response> {
    let view = check_view(query.map_err(|e| ServiceError::Malformed(e.body_text()))?.0.view)?;
    let target = lock(&app.session(&id)?).session.target();
    render(app, target, view).await
}

async fn chair_snapshot(
    State(app): State<AppState>,
    path: Result<Path<(ChairId, usize)>, PathRejection>,
) -> Result<Response> {
    let Path((chair_id, view)) = path.map_err(|e| ServiceError::Malformed(e.body_text()))?;
    render(app, chair_id, check_view(view)?).await
}

async fn render(app: AppState, chair_id: ChairId, view: usize) -> Result<Response> {
    let bytes = tokio::task::spawn_blocking(move || app.snapshot_cache().get_or_render(app.engine(), chair_id, view))
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))??;
    Ok(png(bytes))
}

async fn api_not_found() -> ServiceError {
    ServiceError::NotFound
}

/// All API routes, plus static assets under `/` when a directory is given.
pub fn router(app: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/dictionary", get(dictionary))
        .route("/api/sessions", post(create_session).get(list_sessions))
        .route("/api/sessions/{id}", get(get_state))
        .route("/api/sessions/{id}/voice", post(submit_voice))
        .route("/api/sessions/{id}/sketch", post(submit_sketch))
        .route("/api/sessions/{id}/select", post(select))
        .route("/api/sessions/{id}/abandon", post(abandon))
        .route("/api/sessions/{id}/descriptor/deltas", post(descriptor_deltas))
        .route("/api/sessions/{id}/descriptor/reset", post(descriptor_reset))
        .route("/api/sessions/{id}/descriptor/sync", post(descriptor_sync))
        .route("/api/sessions/{id}/outcome", get(outcome))
        .route("/api/sessions/{id}/target", get(target_snapshot))
        .route("/api/chairs/{chair_id}/views/{view}", get(chair_snapshot))
        .route("/api/{*rest}", get(api_not_found).post(api_not_found))
        .with_state(app);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(api_not_found),
    }
}
