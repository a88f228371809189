//! On-disk layout of a trained sweep. Everything the API serves can be
//! rebuilt from these files:
//!
//! ```text
//! sweep.json            grid, config, classes, test metadata, cached probabilities
//! models/w000010.json   one forest per window
//! testset/              the test series as a dataset directory (for PDPs)
//! curve.json            accuracy curve and length histograms
//! confusion.json        confusion matrix per window
//! temporal.json         probability matrix per test series
//! loo.json              leave-one-out result, once computed
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, DrCifConfig, MultivariateSeries, Split};
use crate::drcif::DrCifModel;
use crate::early::{
    accuracy_curve, confusion, histogram, temporal_probabilities, ConfusionMatrix, CurvePoint, HistogramBin, LooResult,
    TemporalMatrix, WindowSweep, SWEEP_FORMAT_VERSION,
};
use crate::error::{Error, Result};
use crate::io;

pub const SWEEP_FILE: &str = "sweep.json";
pub const MODELS_DIR: &str = "models";
pub const TESTSET_DIR: &str = "testset";
pub const CURVE_FILE: &str = "curve.json";
pub const CONFUSION_FILE: &str = "confusion.json";
pub const TEMPORAL_FILE: &str = "temporal.json";
pub const LOO_FILE: &str = "loo.json";

pub const HISTOGRAM_BIN: usize = 10;

/// `{dataset}-step{S}-trees{N}-seed{R}`
pub fn sweep_id(dataset_id: &str, step: usize, config: &DrCifConfig) -> String {
    format!("{dataset_id}-step{step}-trees{}-seed{}", config.n_trees, config.seed)
}

pub fn model_file(window_len: usize) -> String {
    format!("w{window_len:06}.json")
}

/// Accuracy curve with both length histograms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub points: Vec<CurvePoint>,
    pub bin_width: usize,
    pub histogram_all: Vec<HistogramBin>,
    pub histogram_test: Vec<HistogramBin>,
}

pub fn curve_report(sweep: &WindowSweep) -> CurveReport {
    CurveReport {
        points: accuracy_curve(sweep),
        bin_width: HISTOGRAM_BIN,
        histogram_all: histogram(&sweep.lengths_all, HISTOGRAM_BIN),
        histogram_test: histogram(&sweep.test_lengths(), HISTOGRAM_BIN),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string(value).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Writes every artifact of a trained sweep into `dir`. `test_series` must
/// be the sweep's test split in the same order.
pub fn save_sweep(sweep: &WindowSweep, test_series: &[&MultivariateSeries], dir: &Path) -> Result<()> {
    if sweep.models.len() != sweep.grid.len() {
        return Err(Error::invalid("sweep has no models to save"));
    }
    if test_series.len() != sweep.test.len() || test_series.iter().zip(&sweep.test).any(|(s, m)| s.id != m.id) {
        return Err(Error::invalid("test series do not match the sweep"));
    }
    let models = dir.join(MODELS_DIR);
    fs::create_dir_all(&models).map_err(|e| Error::io(&models, e))?;
    write_json(&dir.join(SWEEP_FILE), sweep)?;
    for m in &sweep.models {
        write_json(&models.join(model_file(m.window_len)), m)?;
    }
    let testset = Dataset::with_classes(
        format!("{}-test", sweep.dataset_id),
        sweep.channels.clone(),
        sweep.classes.clone(),
        test_series.iter().map(|s| (*s).clone()).collect(),
    )?;
    io::save_dataset(&testset, &dir.join(TESTSET_DIR))?;
    write_derived(sweep, dir)
}

fn write_derived(sweep: &WindowSweep, dir: &Path) -> Result<()> {
    write_json(&dir.join(CURVE_FILE), &curve_report(sweep))?;
    let matrices: Vec<ConfusionMatrix> = sweep
        .windows()
        .into_iter()
        .map(|w| confusion(sweep, w))
        .collect::<Result<_>>()?;
    write_json(&dir.join(CONFUSION_FILE), &matrices)?;
    let temporal: Vec<TemporalMatrix> = sweep
        .test
        .iter()
        .map(|m| temporal_probabilities(sweep, &m.id))
        .collect::<Result<_>>()?;
    write_json(&dir.join(TEMPORAL_FILE), &temporal)
}

/// Reads `sweep.json` only; `models` stays empty.
pub fn load_sweep_meta(dir: &Path) -> Result<WindowSweep> {
    let path = dir.join(SWEEP_FILE);
    let sweep: WindowSweep = read_json(&path)?;
    if sweep.format_version != SWEEP_FORMAT_VERSION {
        return Err(Error::format(
            &path,
            format!("unsupported sweep format version {}", sweep.format_version),
        ));
    }
    if sweep.test_probs.len() != sweep.grid.len() {
        return Err(Error::format(&path, "probability cache does not match the grid"));
    }
    Ok(sweep)
}

pub fn model_path(dir: &Path, window_len: usize) -> PathBuf {
    dir.join(MODELS_DIR).join(model_file(window_len))
}

pub fn load_model(dir: &Path, window_len: usize) -> Result<DrCifModel> {
    let path = model_path(dir, window_len);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    DrCifModel::from_json(&text)
}

/// Reads `sweep.json` and every model.
pub fn load_sweep(dir: &Path) -> Result<WindowSweep> {
    let mut sweep = load_sweep_meta(dir)?;
    sweep.models = sweep
        .windows()
        .into_iter()
        .map(|w| load_model(dir, w))
        .collect::<Result<_>>()?;
    Ok(sweep)
}

/// The persisted test split, every series tagged as test.
pub fn load_testset(dir: &Path) -> Result<Dataset> {
    let mut ds = io::load_dataset(&dir.join(TESTSET_DIR))?;
    ds.split = vec![Split::Test; ds.series.len()];
    Ok(ds)
}

pub fn save_loo(result: &LooResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_json(&dir.join(LOO_FILE), result)
}

/// `None` until leave-one-out has been run for this sweep.
pub fn load_loo(dir: &Path) -> Result<Option<LooResult>> {
    let path = dir.join(LOO_FILE);
    if !path.exists() {
        return Ok(None);
    }
    read_json(&path).map(Some)
}
