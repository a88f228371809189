//! Growing-window evaluation: one forest per prefix length, the accuracy
//! curve over window lengths, per-window confusion matrices, per-series
//! probability trajectories and grouped leave-one-out.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, DrCifConfig, MultivariateSeries, NormalizationParams, Split};
use crate::drcif::{self, argmax, DrCifModel, MIN_WINDOW};
use crate::error::{Error, Result};
use crate::features::summary;
use crate::preprocess::fit_normalization;

pub const DEFAULT_STEP: usize = 10;
pub const SWEEP_FORMAT_VERSION: u32 = 1;

/// Windows `step, 2 step, ..., end` with `end` the maximum series length
/// rounded up to a multiple of `step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowGrid {
    pub start: usize,
    pub step: usize,
    pub end: usize,
}

impl WindowGrid {
    pub fn new(step: usize, max_len: usize) -> Result<Self> {
        if step < MIN_WINDOW {
            return Err(Error::invalid(format!(
                "window step must be at least {MIN_WINDOW}, got {step}"
            )));
        }
        if max_len == 0 {
            return Err(Error::invalid("cannot build a window grid for empty series"));
        }
        Ok(Self {
            start: step,
            step,
            end: max_len.div_ceil(step) * step,
        })
    }

    pub fn windows(&self) -> Vec<usize> {
        (self.start..=self.end).step_by(self.step).collect()
    }

    pub fn len(&self) -> usize {
        (self.end - self.start) / self.step + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn position(&self, window_len: usize) -> Option<usize> {
        if window_len < self.start || window_len > self.end || (window_len - self.start) % self.step != 0 {
            return None;
        }
        Some((window_len - self.start) / self.step)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub id: String,
    pub label: String,
    pub group: String,
    pub length: usize,
}

impl SeriesMeta {
    pub fn of(s: &MultivariateSeries) -> Self {
        Self {
            id: s.id.clone(),
            label: s.label.clone(),
            group: s.group.clone(),
            length: s.len(),
        }
    }
}

/// All window models of a dataset plus the cached test-set probabilities.
/// Everything except `models` is persisted in one file; models are stored
/// one file per window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSweep {
    pub format_version: u32,
    pub dataset_id: String,
    pub config: DrCifConfig,
    pub grid: WindowGrid,
    pub classes: Vec<String>,
    pub channels: Vec<String>,
    pub norm: NormalizationParams,
    /// Lengths of every series in the dataset, in dataset order.
    pub lengths_all: Vec<usize>,
    /// Test series in dataset order.
    pub test: Vec<SeriesMeta>,
    /// `test_probs[window][test series][class]`
    pub test_probs: Vec<Vec<Vec<f64>>>,
    #[serde(skip)]
    pub models: Vec<DrCifModel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepProgress {
    pub window_len: usize,
    pub done: usize,
    pub total: usize,
}

/// Trains one forest per grid window on the training split and caches the
/// test-set probabilities of each.
pub fn train_sweep(
    dataset: &Dataset,
    config: &DrCifConfig,
    step: usize,
    mut progress: impl FnMut(SweepProgress),
) -> Result<WindowSweep> {
    config.validate()?;
    let norm = dataset
        .norm
        .clone()
        .ok_or_else(|| Error::invalid("dataset has no train/test split"))?;
    let grid = WindowGrid::new(step, dataset.max_len())?;
    let train = dataset.train();
    let test = dataset.test();
    let channels = dataset.channel_names();
    let windows = grid.windows();
    let mut models = Vec::with_capacity(windows.len());
    let mut test_probs = Vec::with_capacity(windows.len());
    for (i, &w) in windows.iter().enumerate() {
        progress(SweepProgress {
            window_len: w,
            done: i,
            total: windows.len(),
        });
        let model = drcif::fit_series(&train, &dataset.classes, &channels, &norm, w, config)?;
        test_probs.push(predict_many(&model, &test)?);
        models.push(model);
    }
    progress(SweepProgress {
        window_len: grid.end,
        done: windows.len(),
        total: windows.len(),
    });
    Ok(WindowSweep {
        format_version: SWEEP_FORMAT_VERSION,
        dataset_id: dataset.id.clone(),
        config: config.clone(),
        grid,
        classes: dataset.classes.clone(),
        channels,
        norm,
        lengths_all: dataset.series.iter().map(|s| s.len()).collect(),
        test: test.iter().map(|s| SeriesMeta::of(s)).collect(),
        test_probs,
        models,
    })
}

fn predict_many(model: &DrCifModel, series: &[&MultivariateSeries]) -> Result<Vec<Vec<f64>>> {
    series.par_iter().map(|s| model.predict_proba(s)).collect()
}

impl WindowSweep {
    pub fn windows(&self) -> Vec<usize> {
        self.grid.windows()
    }

    fn window_index(&self, window_len: usize) -> Result<usize> {
        self.grid.position(window_len).ok_or(Error::UnknownWindow(window_len))
    }

    pub fn model(&self, window_len: usize) -> Result<&DrCifModel> {
        let i = self.window_index(window_len)?;
        self.models
            .get(i)
            .ok_or_else(|| Error::invalid("sweep was loaded without its models"))
    }

    pub fn test_class_indices(&self) -> Vec<usize> {
        self.test
            .iter()
            .map(|m| {
                self.classes
                    .iter()
                    .position(|c| *c == m.label)
                    .expect("test labels belong to the class list")
            })
            .collect()
    }

    pub fn test_lengths(&self) -> Vec<usize> {
        self.test.iter().map(|m| m.length).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub window_len: usize,
    pub accuracy: f64,
    pub n_shorter_all: usize,
    pub n_shorter_test: usize,
}

fn count_shorter(lengths: &[usize], window_len: usize) -> usize {
    lengths.iter().filter(|&&l| l < window_len).count()
}

fn accuracy_of(probs: &[Vec<f64>], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = probs.iter().zip(truth).filter(|(p, &t)| argmax(p) == t).count();
    hits as f64 / truth.len() as f64
}

/// Test accuracy of every window model, from the cached probabilities.
pub fn accuracy_curve(sweep: &WindowSweep) -> Vec<CurvePoint> {
    let truth = sweep.test_class_indices();
    let test_lengths = sweep.test_lengths();
    sweep
        .windows()
        .into_iter()
        .zip(&sweep.test_probs)
        .map(|(w, probs)| CurvePoint {
            window_len: w,
            accuracy: accuracy_of(probs, &truth),
            n_shorter_all: count_shorter(&sweep.lengths_all, w),
            n_shorter_test: count_shorter(&test_lengths, w),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub start: usize,
    pub count: usize,
}

/// Counts per bin `[b, b + bin_width)`; only non-empty bins, ascending.
pub fn histogram(lengths: &[usize], bin_width: usize) -> Vec<HistogramBin> {
    assert!(bin_width > 0, "bin width must be positive");
    let mut bins: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in lengths {
        *bins.entry(l / bin_width * bin_width).or_default() += 1;
    }
    bins.into_iter()
        .map(|(start, count)| HistogramBin { start, count })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    All,
    Test,
}

pub fn length_histogram(dataset: &Dataset, scope: Scope, bin_width: usize) -> Vec<HistogramBin> {
    let lengths: Vec<usize> = match scope {
        Scope::All => dataset.series.iter().map(|s| s.len()).collect(),
        Scope::Test => dataset.iter_split(Split::Test).map(|s| s.len()).collect(),
    };
    histogram(&lengths, bin_width)
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub window_len: usize,
    pub classes: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let trace: usize = (0..self.counts.len()).map(|i| self.counts[i][i]).sum();
        trace as f64 / total as f64
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }
}

pub fn confusion(sweep: &WindowSweep, window_len: usize) -> Result<ConfusionMatrix> {
    let wi = sweep.window_index(window_len)?;
    let c = sweep.classes.len();
    let mut counts = vec![vec![0; c]; c];
    for (p, t) in sweep.test_probs[wi].iter().zip(sweep.test_class_indices()) {
        counts[t][argmax(p)] += 1;
    }
    Ok(ConfusionMatrix {
        window_len,
        classes: sweep.classes.clone(),
        counts,
    })
}

/// Class-by-window probabilities of one test series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalMatrix {
    pub series_id: String,
    pub label: String,
    pub length: usize,
    pub classes: Vec<String>,
    pub windows: Vec<usize>,
    /// `probs[class][window]`
    pub probs: Vec<Vec<f64>>,
}

pub fn temporal_probabilities(sweep: &WindowSweep, series_id: &str) -> Result<TemporalMatrix> {
    let si = sweep
        .test
        .iter()
        .position(|m| m.id == series_id)
        .ok_or_else(|| Error::UnknownSeries(series_id.to_string()))?;
    let windows = sweep.windows();
    let probs = (0..sweep.classes.len())
        .map(|c| sweep.test_probs.iter().map(|w| w[si][c]).collect())
        .collect();
    let meta = &sweep.test[si];
    Ok(TemporalMatrix {
        series_id: meta.id.clone(),
        label: meta.label.clone(),
        length: meta.length,
        classes: sweep.classes.clone(),
        windows,
        probs,
    })
}

/// Per-window spread of the fold accuracies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub window_len: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(window_len: usize, values: &[f64]) -> Self {
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        Self {
            window_len,
            mean: summary::mean(values),
            std: summary::std(values),
            min: s[0],
            q1: summary::quantile_sorted(&s, 0.25),
            median: summary::quantile_sorted(&s, 0.5),
            q3: summary::quantile_sorted(&s, 0.75),
            max: s[s.len() - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooFold {
    pub group: String,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    /// Accuracy on the held-out group, per window.
    pub accuracy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooResult {
    pub format_version: u32,
    pub dataset_id: String,
    pub config: DrCifConfig,
    pub grid: WindowGrid,
    pub folds: Vec<LooFold>,
    pub summary: Vec<Summary>,
}

/// Series indices of the training and test side of the fold holding out
/// `group`.
pub fn loo_partition(dataset: &Dataset, group: &str) -> (Vec<usize>, Vec<usize>) {
    (0..dataset.series.len()).partition(|&i| dataset.series[i].group != group)
}

/// Holds out each group in turn, training on every other series regardless
/// of the stored split. Every fold uses the same seed.
pub fn leave_one_out(
    dataset: &Dataset,
    config: &DrCifConfig,
    step: usize,
    mut progress: impl FnMut(&str, SweepProgress),
) -> Result<LooResult> {
    config.validate()?;
    let groups = dataset.groups();
    if groups.len() < 2 {
        return Err(Error::invalid(format!(
            "leave-one-out needs at least 2 groups, found {}",
            groups.len()
        )));
    }
    let grid = WindowGrid::new(step, dataset.max_len())?;
    let windows = grid.windows();
    let channels = dataset.channel_names();
    let mut folds = Vec::with_capacity(groups.len());
    for g in &groups {
        let (train_idx, test_idx) = loo_partition(dataset, g);
        let train: Vec<&MultivariateSeries> = train_idx.iter().map(|&i| &dataset.series[i]).collect();
        let test: Vec<&MultivariateSeries> = test_idx.iter().map(|&i| &dataset.series[i]).collect();
        let truth = drcif::label_indices(&dataset.classes, &test)?;
        let norm = fit_normalization(&train)?;
        let mut accuracy = Vec::with_capacity(windows.len());
        for (i, &w) in windows.iter().enumerate() {
            progress(
                g,
                SweepProgress {
                    window_len: w,
                    done: i,
                    total: windows.len(),
                },
            );
            let model = drcif::fit_series(&train, &dataset.classes, &channels, &norm, w, config)?;
            accuracy.push(accuracy_of(&predict_many(&model, &test)?, &truth));
        }
        folds.push(LooFold {
            group: g.clone(),
            train_ids: train.iter().map(|s| s.id.clone()).collect(),
            test_ids: test.iter().map(|s| s.id.clone()).collect(),
            accuracy,
        });
    }
    let summary = windows
        .iter()
        .enumerate()
        .map(|(wi, &w)| {
            let values: Vec<f64> = folds.iter().map(|f| f.accuracy[wi]).collect();
            Summary::of(w, &values)
        })
        .collect();
    Ok(LooResult {
        format_version: SWEEP_FORMAT_VERSION,
        dataset_id: dataset.id.clone(),
        config: config.clone(),
        grid,
        folds,
        summary,
    })
}
