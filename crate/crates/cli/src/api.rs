//! HTTP API over a data directory:
//!
//! ```text
//! {data_dir}/datasets/{id}/   dataset directories
//! {data_dir}/sweeps/{sid}/    sweep artifacts
//! ```
//!
//! Training runs as a background job; everything else reads artifacts, so a
//! restarted server answers exactly like the one that trained the sweep.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;
use xmtc_core::artifacts::{self, CurveReport};
use xmtc_core::early::{self, SeriesMeta, SweepProgress};
use xmtc_core::explain::{pdp_surface, DEFAULT_GRID_SIZE};
use xmtc_core::{ConfusionMatrix, DrCifConfig, Error, LooResult, PdpSurface, TemporalMatrix, WindowSweep};

use crate::dataset::{load_prepared, summarize, DatasetSummary};

pub const DATASETS_DIR: &str = "datasets";
pub const SWEEPS_DIR: &str = "sweeps";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum Phase {
    Queued,
    Training { window: usize },
    Done,
    Failed { message: String },
}

impl Phase {
    fn rank(&self) -> u8 {
        match self {
            Phase::Queued => 0,
            Phase::Training { .. } => 1,
            Phase::Done | Phase::Failed { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobState {
    pub job_id: String,
    pub dataset_id: String,
    pub sweep_id: String,
    #[serde(flatten)]
    pub phase: Phase,
    /// Fraction of windows trained, in `[0, 1]`.
    pub progress: f64,
}

impl JobState {
    /// Phases only move forward.
    fn advance(&mut self, phase: Phase, progress: f64) {
        if phase.rank() >= self.phase.rank() && self.phase.rank() < 2 {
            self.phase = phase;
            self.progress = progress.max(self.progress);
        }
    }
}

pub struct AppState {
    data_dir: PathBuf,
    next_job: AtomicU64,
    jobs: Mutex<BTreeMap<String, JobState>>,
    /// dataset id -> sweep id being trained
    active: Mutex<HashMap<String, String>>,
    sweeps: RwLock<HashMap<String, Arc<WindowSweep>>>,
    pdps: Mutex<HashMap<(String, usize, usize), Arc<PdpSurface>>>,
}

impl AppState {
    pub fn new(data_dir: impl Into<PathBuf>) -> Arc<Self> {
        Arc::new(Self {
            data_dir: data_dir.into(),
            next_job: AtomicU64::new(1),
            jobs: Mutex::new(BTreeMap::new()),
            active: Mutex::new(HashMap::new()),
            sweeps: RwLock::new(HashMap::new()),
            pdps: Mutex::new(HashMap::new()),
        })
    }

    pub fn datasets_dir(&self) -> PathBuf {
        self.data_dir.join(DATASETS_DIR)
    }

    pub fn sweeps_dir(&self) -> PathBuf {
        self.data_dir.join(SWEEPS_DIR)
    }

    fn update_job(&self, job_id: &str, phase: Phase, progress: f64) {
        if let Some(j) = self.jobs.lock().unwrap().get_mut(job_id) {
            j.advance(phase, progress);
        }
    }

    fn is_training(&self, sweep_id: &str) -> bool {
        self.active.lock().unwrap().values().any(|s| s == sweep_id)
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownWindow(_) | Error::UnknownSeries(_) => StatusCode::NOT_FOUND,
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => StatusCode::NOT_FOUND,
            Error::InvalidInput(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = std::result::Result<Json<T>, ApiError>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

/// Ids become directory names; anything that could escape the data
/// directory simply does not exist.
fn checked_id(id: &str) -> Result<&str, ApiError> {
    let ok = !id.is_empty()
        && !id.starts_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(id)
    } else {
        Err(ApiError::not_found(format!("unknown id {id:?}")))
    }
}

pub fn router(state: Arc<AppState>, ui_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/datasets", get(list_datasets))
        .route("/api/datasets/{id}/sweeps", post(start_sweep))
        .route("/api/jobs/{job_id}", get(get_job))
        .route("/api/sweeps", get(list_sweeps))
        .route("/api/sweeps/{sid}/curve", get(get_curve))
        .route("/api/sweeps/{sid}/confusion/{window}", get(get_confusion))
        .route("/api/sweeps/{sid}/series", get(get_series))
        .route("/api/sweeps/{sid}/series/{series_id}/temporal", get(get_temporal))
        .route("/api/sweeps/{sid}/pdp/{window}", get(get_pdp))
        .route("/api/sweeps/{sid}/loo", get(get_loo))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(|| async { ApiError::not_found("no such route") }),
    }
}

async fn list_datasets(State(st): State<Arc<AppState>>) -> ApiResult<Vec<DatasetSummary>> {
    let dir = st.datasets_dir();
    let out = blocking(move || {
        let mut out = Vec::new();
        let Ok(entries) = fs::read_dir(&dir) else {
            return Ok(out);
        };
        let mut names: Vec<String> = entries
            .filter_map(|e| e.ok())
            .filter(|e| e.path().join(xmtc_core::io::MANIFEST_FILE).is_file())
            .filter_map(|e| e.file_name().into_string().ok())
            .collect();
        names.sort();
        for name in names {
            let ds = load_prepared(&dir.join(&name))?;
            out.push(summarize(&name, &ds));
        }
        Ok(out)
    })
    .await?;
    Ok(Json(out))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepRequest {
    #[serde(default = "default_step")]
    step: usize,
    #[serde(default = "default_trees")]
    n_trees: usize,
    #[serde(default)]
    seed: u64,
}

fn default_step() -> usize {
    early::DEFAULT_STEP
}

fn default_trees() -> usize {
    DrCifConfig::default().n_trees
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobCreated {
    pub job_id: String,
    pub sweep_id: String,
}

async fn start_sweep(
    State(st): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<JobCreated> {
    let id = checked_id(&id)?.to_string();
    let req: SweepRequest = if body.iter().all(u8::is_ascii_whitespace) {
        serde_json::from_str("{}").expect("empty request")
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("malformed body: {e}")))?
    };
    if req.step < xmtc_core::drcif::MIN_WINDOW {
        return Err(ApiError::bad_request(format!(
            "step must be at least {}",
            xmtc_core::drcif::MIN_WINDOW
        )));
    }
    if req.n_trees == 0 {
        return Err(ApiError::bad_request("n_trees must be at least 1"));
    }
    let dataset_dir = st.datasets_dir().join(&id);
    if !dataset_dir.join(xmtc_core::io::MANIFEST_FILE).is_file() {
        return Err(ApiError::not_found(format!("unknown dataset {id:?}")));
    }
    let config = DrCifConfig::default().with_trees(req.n_trees).with_seed(req.seed);
    let sid = artifacts::sweep_id(&id, req.step, &config);
    let sweep_dir = st.sweeps_dir().join(&sid);
    {
        let mut active = st.active.lock().unwrap();
        if sweep_dir.join(artifacts::SWEEP_FILE).is_file() {
            return Err(ApiError::conflict(format!("sweep {sid} already exists")));
        }
        if let Some(running) = active.get(&id) {
            return Err(ApiError::conflict(format!(
                "dataset {id} is already training sweep {running}"
            )));
        }
        active.insert(id.clone(), sid.clone());
    }
    let job_id = format!("job-{}", st.next_job.fetch_add(1, Ordering::Relaxed));
    st.jobs.lock().unwrap().insert(
        job_id.clone(),
        JobState {
            job_id: job_id.clone(),
            dataset_id: id.clone(),
            sweep_id: sid.clone(),
            phase: Phase::Queued,
            progress: 0.0,
        },
    );
    let task_state = st.clone();
    let task_job = job_id.clone();
    let step = req.step;
    tokio::task::spawn_blocking(move || {
        let st = task_state;
        let result = run_training(&st, &task_job, &dataset_dir, &sweep_dir, step, &config);
        match result {
            Ok(()) => st.update_job(&task_job, Phase::Done, 1.0),
            Err(e) => {
                tracing::warn!(job = %task_job, error = %e, "training failed");
                st.update_job(&task_job, Phase::Failed { message: e.to_string() }, 0.0);
            }
        }
        st.active.lock().unwrap().remove(&id);
    });
    Ok(Json(JobCreated { job_id, sweep_id: sid }))
}

fn run_training(
    st: &AppState,
    job_id: &str,
    dataset_dir: &Path,
    sweep_dir: &Path,
    step: usize,
    config: &DrCifConfig,
) -> xmtc_core::Result<()> {
    let ds = load_prepared(dataset_dir)?;
    let sweep = early::train_sweep(&ds, config, step, |p: SweepProgress| {
        st.update_job(
            job_id,
            Phase::Training { window: p.window_len },
            p.done as f64 / p.total as f64,
        );
    })?;
    let name = sweep_dir.file_name().expect("sweep dir has a name").to_string_lossy();
    let partial = sweep_dir.with_file_name(format!(".{name}.partial"));
    if partial.exists() {
        fs::remove_dir_all(&partial).map_err(|e| io_err(&partial, e))?;
    }
    artifacts::save_sweep(&sweep, &ds.test(), &partial)?;
    fs::rename(&partial, sweep_dir).map_err(|e| io_err(sweep_dir, e))?;
    tracing::info!(sweep = %name, "sweep stored");
    Ok(())
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

async fn get_job(State(st): State<Arc<AppState>>, UrlPath(job_id): UrlPath<String>) -> ApiResult<JobState> {
    st.jobs
        .lock()
        .unwrap()
        .get(&job_id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("unknown job {job_id:?}")))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub id: String,
    pub dataset_id: String,
    pub step: usize,
    pub n_trees: usize,
    pub seed: u64,
    pub windows: usize,
}

async fn list_sweeps(State(st): State<Arc<AppState>>) -> ApiResult<Vec<SweepSummary>> {
    let dir = st.sweeps_dir();
    let mut names: Vec<String> = match fs::read_dir(&dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().into_string().ok())
            .filter(|n| !n.starts_with('.'))
            .collect(),
        Err(_) => Vec::new(),
    };
    names.sort();
    let mut out = Vec::new();
    for name in names {
        if let Ok(s) = load_sweep_cached(&st, &name).await {
            out.push(SweepSummary {
                id: name,
                dataset_id: s.dataset_id.clone(),
                step: s.grid.step,
                n_trees: s.config.n_trees,
                seed: s.config.seed,
                windows: s.grid.len(),
            });
        }
    }
    Ok(Json(out))
}

async fn load_sweep_cached(st: &Arc<AppState>, sid: &str) -> Result<Arc<WindowSweep>, ApiError> {
    let sid = checked_id(sid)?.to_string();
    if st.is_training(&sid) {
        return Err(ApiError::conflict(format!("sweep {sid} is still training")));
    }
    if let Some(s) = st.sweeps.read().unwrap().get(&sid) {
        return Ok(s.clone());
    }
    let dir = st.sweeps_dir().join(&sid);
    if !dir.join(artifacts::SWEEP_FILE).is_file() {
        return Err(ApiError::not_found(format!("unknown sweep {sid:?}")));
    }
    let sweep = Arc::new(blocking(move || Ok(artifacts::load_sweep_meta(&dir)?)).await?);
    st.sweeps.write().unwrap().insert(sid, sweep.clone());
    Ok(sweep)
}

async fn get_curve(State(st): State<Arc<AppState>>, UrlPath(sid): UrlPath<String>) -> ApiResult<CurveReport> {
    let sweep = load_sweep_cached(&st, &sid).await?;
    Ok(Json(artifacts::curve_report(&sweep)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfusionResponse {
    #[serde(flatten)]
    pub matrix: ConfusionMatrix,
    pub accuracy: f64,
    pub n_shorter_all: usize,
    pub n_shorter_test: usize,
}

async fn get_confusion(
    State(st): State<Arc<AppState>>,
    UrlPath((sid, window)): UrlPath<(String, String)>,
) -> ApiResult<ConfusionResponse> {
    let sweep = load_sweep_cached(&st, &sid).await?;
    let window: usize = window
        .parse()
        .map_err(|_| ApiError::not_found(format!("unknown window {window:?}")))?;
    let matrix = early::confusion(&sweep, window)?;
    let point = early::accuracy_curve(&sweep)
        .into_iter()
        .find(|p| p.window_len == window)
        .expect("window validated by confusion");
    Ok(Json(ConfusionResponse {
        accuracy: matrix.accuracy(),
        matrix,
        n_shorter_all: point.n_shorter_all,
        n_shorter_test: point.n_shorter_test,
    }))
}

async fn get_series(State(st): State<Arc<AppState>>, UrlPath(sid): UrlPath<String>) -> ApiResult<Vec<SeriesMeta>> {
    let sweep = load_sweep_cached(&st, &sid).await?;
    Ok(Json(sweep.test.clone()))
}

async fn get_temporal(
    State(st): State<Arc<AppState>>,
    UrlPath((sid, series_id)): UrlPath<(String, String)>,
) -> ApiResult<TemporalMatrix> {
    let sweep = load_sweep_cached(&st, &sid).await?;
    Ok(Json(early::temporal_probabilities(&sweep, &series_id)?))
}

#[derive(Debug, Deserialize)]
struct PdpQuery {
    grid: Option<usize>,
}

async fn get_pdp(
    State(st): State<Arc<AppState>>,
    UrlPath((sid, window)): UrlPath<(String, String)>,
    Query(q): Query<PdpQuery>,
) -> ApiResult<PdpSurface> {
    let sweep = load_sweep_cached(&st, &sid).await?;
    let window: usize = window
        .parse()
        .map_err(|_| ApiError::not_found(format!("unknown window {window:?}")))?;
    if sweep.grid.position(window).is_none() {
        return Err(Error::UnknownWindow(window).into());
    }
    let grid = q.grid.unwrap_or(DEFAULT_GRID_SIZE);
    if grid < 2 {
        return Err(ApiError::bad_request("grid must have at least 2 points"));
    }
    let key = (sid.clone(), window, grid);
    if let Some(p) = st.pdps.lock().unwrap().get(&key) {
        return Ok(Json(PdpSurface::clone(p)));
    }
    let dir = st.sweeps_dir().join(&sid);
    let surface = blocking(move || {
        let model = artifacts::load_model(&dir, window)?;
        let testset = artifacts::load_testset(&dir)?;
        Ok(pdp_surface(&model, &testset.test(), grid)?)
    })
    .await?;
    st.pdps.lock().unwrap().insert(key, Arc::new(surface.clone()));
    Ok(Json(surface))
}

async fn get_loo(State(st): State<Arc<AppState>>, UrlPath(sid): UrlPath<String>) -> ApiResult<LooResult> {
    load_sweep_cached(&st, &sid).await?;
    let dir = st.sweeps_dir().join(&sid);
    let loo = blocking(move || Ok(artifacts::load_loo(&dir)?)).await?;
    loo.map(Json)
        .ok_or_else(|| ApiError::not_found(format!("leave-one-out has not been run for sweep {sid}")))
}
