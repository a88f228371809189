//! API contract checks shared by the `api` tests and the acceptance run.
//!
//! A tiny synthetic dataset is trained through the API itself; every GET
//! body is then compared against the golden files in `tests/golden/`
//! (rewrite them with `XMTC_BLESS=1`) and cross-checked against the core
//! library. Finally a fresh router over the same directory must answer
//! byte for byte the same.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;
use xmtc_cli::api::{router, AppState};
use xmtc_core::artifacts::{load_model, load_testset, save_loo};
use xmtc_core::early::leave_one_out;
use xmtc_core::io::save_dataset;
use xmtc_core::synth::{synthesize, SynthConfig};
use xmtc_core::DrCifConfig;

pub const DATASET: &str = "tiny";
pub const N_TREES: usize = 5;
pub const SEED: u64 = 1;

pub fn tiny_config() -> SynthConfig {
    SynthConfig {
        id: DATASET.into(),
        objects: vec!["cup".into(), "pen".into()],
        series_per_class: 6,
        n_channels: 3,
        length_mean: 35.0,
        length_std: 3.0,
        length_min: 30,
        length_max: 40,
        t_side: 5,
        t_obj: 15,
        n_groups: 3,
        test_frac: 0.34,
        seed: 0,
        ..SynthConfig::default()
    }
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Data directory holding the tiny dataset and nothing else.
pub fn data_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let ds = synthesize(&tiny_config()).unwrap();
    save_dataset(&ds, &dir.path().join("datasets").join(DATASET)).unwrap();
    dir
}

pub async fn call(app: &Router, method: &str, uri: &str, body: &str) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Vec<u8>) {
    call(app, "GET", uri, "").await
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn expect_status(uri: &str, got: StatusCode, want: StatusCode) -> Check {
    ensure(got == want, format!("{uri}: status {got}, expected {want}"))
}

fn golden(name: &str, body: &[u8]) -> Check {
    let path = golden_dir().join(name);
    if std::env::var_os("XMTC_BLESS").is_some() {
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&path, body).unwrap();
        return Ok(());
    }
    let want = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    ensure(want == body, format!("{name} differs from its golden file"))
}

async fn wait_for_job(app: &Router, job_id: &str, limit: Duration) -> Result<Value, String> {
    let start = Instant::now();
    let mut last_rank = 0;
    loop {
        let (status, body) = get(app, &format!("/api/jobs/{job_id}")).await;
        expect_status("job", status, StatusCode::OK)?;
        let state = json(&body);
        let rank = match state["phase"].as_str() {
            Some("queued") => 0,
            Some("training") => 1,
            Some("done") | Some("failed") => 2,
            other => return Err(format!("unexpected phase {other:?}")),
        };
        ensure(rank >= last_rank, "job phase went backwards")?;
        last_rank = rank;
        if rank == 2 {
            return Ok(state);
        }
        if start.elapsed() > limit {
            return Err("training job did not finish in time".into());
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
}

/// Every GET endpoint of a finished sweep, in a fixed order.
pub fn read_uris(sid: &str, series_ids: &[String]) -> Vec<String> {
    let mut uris = vec![
        "/api/datasets".to_string(),
        "/api/sweeps".to_string(),
        format!("/api/sweeps/{sid}/curve"),
        format!("/api/sweeps/{sid}/series"),
        format!("/api/sweeps/{sid}/loo"),
    ];
    for w in [10, 20, 30, 40] {
        uris.push(format!("/api/sweeps/{sid}/confusion/{w}"));
    }
    uris.push(format!("/api/sweeps/{sid}/pdp/20"));
    uris.push(format!("/api/sweeps/{sid}/pdp/40?grid=5"));
    for id in series_ids {
        uris.push(format!("/api/sweeps/{sid}/series/{id}/temporal"));
    }
    uris
}

/// Runs the whole contract; returns one line per group of checks.
pub async fn api_contract() -> Result<Vec<String>, String> {
    let dir = data_dir();
    let mut done = Vec::new();
    let app = router(AppState::new(dir.path()), None);

    // datasets
    let (s, body) = get(&app, "/api/datasets").await;
    expect_status("/api/datasets", s, StatusCode::OK)?;
    golden("datasets.json", &body)?;
    let listed = json(&body);
    ensure(listed[0]["id"] == DATASET, "dataset not listed")?;
    ensure(listed[0]["n_series"] == 24, "dataset size")?;

    // bad requests before training
    let sweeps_uri = format!("/api/datasets/{DATASET}/sweeps");
    let (s, _) = call(&app, "POST", "/api/datasets/nope/sweeps", "{}").await;
    expect_status("POST unknown dataset", s, StatusCode::NOT_FOUND)?;
    let (s, _) = call(&app, "POST", &sweeps_uri, "{\"step\": ").await;
    expect_status("POST truncated body", s, StatusCode::BAD_REQUEST)?;
    let (s, _) = call(&app, "POST", &sweeps_uri, "{\"steps\": 10}").await;
    expect_status("POST unknown field", s, StatusCode::BAD_REQUEST)?;
    let (s, _) = call(&app, "POST", &sweeps_uri, "{\"step\": 5}").await;
    expect_status("POST step below minimum", s, StatusCode::BAD_REQUEST)?;
    done.push("POST validation: 404 unknown dataset, 400 malformed body".to_string());

    // train through the API
    let body = format!("{{\"step\": 10, \"n_trees\": {N_TREES}, \"seed\": {SEED}}}");
    let (s, created) = call(&app, "POST", &sweeps_uri, &body).await;
    expect_status("POST sweep", s, StatusCode::OK)?;
    let created = json(&created);
    let sid = created["sweep_id"].as_str().unwrap().to_string();
    ensure(
        sid == format!("{DATASET}-step10-trees{N_TREES}-seed{SEED}"),
        format!("sweep id {sid}"),
    )?;
    let job_id = created["job_id"].as_str().unwrap().to_string();
    let state = wait_for_job(&app, &job_id, Duration::from_secs(120)).await?;
    ensure(state["phase"] == "done", format!("job ended as {state}"))?;
    ensure(state["progress"] == 1.0, "job progress")?;
    let (s, _) = call(&app, "POST", &sweeps_uri, &body).await;
    expect_status("POST identical sweep", s, StatusCode::CONFLICT)?;
    let (s, _) = get(&app, "/api/jobs/job-999").await;
    expect_status("unknown job", s, StatusCode::NOT_FOUND)?;
    done.push("jobs: queued -> training -> done, monotone; identical sweep 409".to_string());

    // LOO is absent until computed
    let loo_uri = format!("/api/sweeps/{sid}/loo");
    let (s, _) = get(&app, &loo_uri).await;
    expect_status("loo before compute", s, StatusCode::NOT_FOUND)?;
    let sweep_dir = dir.path().join("sweeps").join(&sid);
    let ds = xmtc_core::io::load_dataset(&dir.path().join("datasets").join(DATASET)).unwrap();
    let cfg = DrCifConfig::default().with_trees(N_TREES).with_seed(SEED);
    let loo = leave_one_out(&ds, &cfg, 10, |_, _| {}).map_err(|e| e.to_string())?;
    save_loo(&loo, &sweep_dir).map_err(|e| e.to_string())?;
    let (s, body) = get(&app, &loo_uri).await;
    expect_status("loo", s, StatusCode::OK)?;
    golden("loo.json", &body)?;
    done.push("loo: 404 until computed, then served".to_string());

    // curve
    let (s, body) = get(&app, &format!("/api/sweeps/{sid}/curve")).await;
    expect_status("curve", s, StatusCode::OK)?;
    golden("curve.json", &body)?;
    let curve = json(&body);
    let points = curve["points"].as_array().unwrap();
    let max_len = ds.max_len();
    ensure(points.len() == max_len.div_ceil(10), "curve length != grid size")?;
    done.push(format!("curve: {} points = grid size", points.len()));

    // series and confusion
    let (s, body) = get(&app, &format!("/api/sweeps/{sid}/series")).await;
    expect_status("series", s, StatusCode::OK)?;
    golden("series.json", &body)?;
    let series = json(&body);
    let series_ids: Vec<String> = series
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["id"].as_str().unwrap().to_string())
        .collect();
    for p in points {
        let w = p["window_len"].as_u64().unwrap();
        let (s, body) = get(&app, &format!("/api/sweeps/{sid}/confusion/{w}")).await;
        expect_status("confusion", s, StatusCode::OK)?;
        golden(&format!("confusion_w{w:03}.json"), &body)?;
        let m = json(&body);
        let classes: Vec<&str> = m["classes"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c.as_str().unwrap())
            .collect();
        for (c, row) in classes.iter().zip(m["counts"].as_array().unwrap()) {
            let row_sum: u64 = row.as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum();
            let listed = series.as_array().unwrap().iter().filter(|t| t["label"] == *c).count() as u64;
            ensure(
                row_sum == listed,
                format!("window {w}: row {c} sums to {row_sum}, /series lists {listed}"),
            )?;
        }
        ensure(
            m["accuracy"] == p["accuracy"],
            format!("window {w}: confusion accuracy != curve"),
        )?;
        ensure(m["n_shorter_all"] == p["n_shorter_all"], "n_shorter_all")?;
        ensure(m["n_shorter_test"] == p["n_shorter_test"], "n_shorter_test")?;
    }
    let (s, _) = get(&app, &format!("/api/sweeps/{sid}/confusion/15")).await;
    expect_status("off-grid window", s, StatusCode::NOT_FOUND)?;
    let (s, _) = get(&app, "/api/sweeps/none/curve").await;
    expect_status("unknown sweep", s, StatusCode::NOT_FOUND)?;
    done.push("confusion: row sums = per-class /series counts, accuracy = curve".to_string());

    // temporal against direct predictions from the stored models
    let testset = load_testset(&sweep_dir).map_err(|e| e.to_string())?;
    let windows: Vec<usize> = points
        .iter()
        .map(|p| p["window_len"].as_u64().unwrap() as usize)
        .collect();
    let models: Vec<_> = windows.iter().map(|&w| load_model(&sweep_dir, w).unwrap()).collect();
    for id in &series_ids {
        let (s, body) = get(&app, &format!("/api/sweeps/{sid}/series/{id}/temporal")).await;
        expect_status("temporal", s, StatusCode::OK)?;
        golden(&format!("temporal_{id}.json"), &body)?;
        let m = json(&body);
        let probs = m["probs"].as_array().unwrap();
        let series = testset.series_by_id(id).unwrap();
        for (wi, model) in models.iter().enumerate() {
            let direct = model.predict_proba(series).unwrap();
            let col: Vec<f64> = probs.iter().map(|row| row[wi].as_f64().unwrap()).collect();
            ensure(
                col == direct,
                format!("{id} window {}: temporal != predict_proba", windows[wi]),
            )?;
            ensure((col.iter().sum::<f64>() - 1.0).abs() <= 1e-12, "temporal column sum")?;
        }
    }
    let (s, _) = get(&app, &format!("/api/sweeps/{sid}/series/nope/temporal")).await;
    expect_status("unknown series", s, StatusCode::NOT_FOUND)?;
    done.push(format!(
        "temporal: {} series, columns = direct predict_proba",
        series_ids.len()
    ));

    // pdp
    for (uri, name, points) in [
        (format!("/api/sweeps/{sid}/pdp/20"), "pdp_w020.json", 20),
        (format!("/api/sweeps/{sid}/pdp/40?grid=5"), "pdp_w040_g5.json", 5),
    ] {
        let (s, body) = get(&app, &uri).await;
        expect_status(&uri, s, StatusCode::OK)?;
        golden(name, &body)?;
        let p = json(&body);
        ensure(p["grid"].as_array().unwrap().len() == points, "pdp grid size")?;
        for ch in p["channels"].as_array().unwrap() {
            let curves = ch["curves"].as_array().unwrap();
            for g in 0..points {
                let sum: f64 = curves.iter().map(|c| c[g].as_f64().unwrap()).sum();
                ensure((sum - 1.0).abs() <= 1e-12, "pdp class sum")?;
            }
        }
    }
    let (s, _) = get(&app, &format!("/api/sweeps/{sid}/pdp/20?grid=1")).await;
    expect_status("pdp grid=1", s, StatusCode::BAD_REQUEST)?;
    let (s, _) = get(&app, &format!("/api/sweeps/{sid}/pdp/20?grid=x")).await;
    expect_status("pdp grid=x", s, StatusCode::BAD_REQUEST)?;
    let (s, _) = get(&app, &format!("/api/sweeps/{sid}/pdp/25")).await;
    expect_status("pdp off-grid", s, StatusCode::NOT_FOUND)?;
    done.push("pdp: grid sizes honoured, class sums = 1".to_string());

    // pure reads, and a restarted server answers identically
    let uris = read_uris(&sid, &series_ids);
    let mut first = Vec::new();
    for uri in &uris {
        let (s, body) = get(&app, uri).await;
        expect_status(uri, s, StatusCode::OK)?;
        first.push(body);
    }
    for (uri, want) in uris.iter().zip(&first) {
        let (_, body) = get(&app, uri).await;
        ensure(&body == want, format!("{uri}: repeated read differs"))?;
    }
    drop(app);
    let restarted = router(AppState::new(dir.path()), None);
    for (uri, want) in uris.iter().zip(&first) {
        let (s, body) = get(&restarted, uri).await;
        expect_status(uri, s, StatusCode::OK)?;
        ensure(&body == want, format!("{uri}: differs after restart"))?;
    }
    done.push(format!("restart-then-read: {} endpoints byte-identical", uris.len()));
    Ok(done)
}

pub fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .unwrap()
}
