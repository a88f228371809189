//! The interval forest: each tree draws its own attribute subset and random
//! intervals over the base series, its first difference and its periodogram,
//! then learns an entropy CART on the resulting feature matrix. Predictions
//! are majority votes.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, DrCifConfig, MultivariateSeries, NormalizationParams};
use crate::error::{Error, Result};
use crate::features::{AttributeId, Segment, N_ATTRIBUTES};
use crate::preprocess::{prepare, RepresentationKind, SeriesRepresentations};
use crate::rng;

pub mod tree;

pub use tree::{fit_tree, DecisionTree, Node};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Smallest window a model can be trained for.
pub const MIN_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalSpec {
    pub representation: RepresentationKind,
    pub channel: usize,
    pub start: usize,
    pub length: usize,
}

impl IntervalSpec {
    pub fn slice<'a>(&self, reps: &'a SeriesRepresentations) -> &'a [f64] {
        &reps.get(self.representation).values[self.channel][self.start..self.start + self.length]
    }
}

/// The random part of a tree: which attributes it computes and where.
/// Intervals are stored grouped by representation (base, diff, periodogram),
/// each group in draw order. Feature `j * a + q` is attribute `q` of the
/// subset evaluated on interval `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeLayout {
    pub attributes: Vec<AttributeId>,
    pub intervals: Vec<IntervalSpec>,
}

impl TreeLayout {
    pub fn n_features(&self) -> usize {
        self.attributes.len() * self.intervals.len()
    }

    /// `(interval index, attribute)` of a feature column.
    pub fn feature(&self, f: usize) -> (usize, AttributeId) {
        let a = self.attributes.len();
        (f / a, self.attributes[f % a])
    }

    pub fn feature_value(&self, reps: &SeriesRepresentations, f: usize) -> f64 {
        let (j, attr) = self.feature(f);
        Segment::new(self.intervals[j].slice(reps)).value(attr)
    }

    /// Number of intervals per representation, in base/diff/periodogram order.
    pub fn interval_counts(&self) -> [usize; 3] {
        let mut k = [0; 3];
        for iv in &self.intervals {
            k[iv.representation as usize] += 1;
        }
        k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub layout: TreeLayout,
    pub tree: DecisionTree,
}

impl TreeSpec {
    pub fn predict_prepared(&self, reps: &SeriesRepresentations) -> usize {
        self.tree.predict(|f| self.layout.feature_value(reps, f))
    }
}

/// A trained forest for one window length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrCifModel {
    pub format_version: u32,
    pub config: DrCifConfig,
    pub classes: Vec<String>,
    pub channels: Vec<String>,
    pub window_len: usize,
    pub norm: NormalizationParams,
    pub trees: Vec<TreeSpec>,
}

/// `4 + floor(sqrt(rep_len) * sqrt(n_channels) / 3)`, or 0 when the
/// representation is shorter than the minimum interval.
pub fn interval_count(rep_len: usize, n_channels: usize, min_interval_len: usize) -> usize {
    if rep_len < min_interval_len {
        return 0;
    }
    4 + ((rep_len as f64).sqrt() * (n_channels as f64).sqrt() / 3.0).floor() as usize
}

/// Longest interval allowed on a representation of length `rep_len`.
pub fn max_interval_len(rep_len: usize, config: &DrCifConfig) -> usize {
    let frac = (config.max_interval_frac * rep_len as f64).floor() as usize;
    frac.max(config.min_interval_len).min(rep_len)
}

/// Draws the layout of tree `tree_index`. All randomness comes from the
/// substream `rng::stream(config.seed, tree_index)`, consumed in this order:
/// the attribute subset, then per representation and per interval the
/// channel, the length and the start.
pub fn sample_tree_layout(window_len: usize, n_channels: usize, config: &DrCifConfig, tree_index: usize) -> TreeLayout {
    let mut rng = rng::stream(config.seed, tree_index as u64);
    let attributes = index::sample(&mut rng, N_ATTRIBUTES, config.attributes_per_tree)
        .into_iter()
        .map(|i| AttributeId::new(i).expect("sampled below N_ATTRIBUTES"))
        .collect();
    let mut intervals = Vec::new();
    for kind in RepresentationKind::ALL {
        let rep_len = kind.length(window_len);
        let k = interval_count(rep_len, n_channels, config.min_interval_len);
        let max_len = max_interval_len(rep_len, config);
        for _ in 0..k {
            let channel = rng.random_range(0..n_channels);
            let length = rng.random_range(config.min_interval_len..=max_len);
            let start = rng.random_range(0..=rep_len - length);
            intervals.push(IntervalSpec {
                representation: kind,
                channel,
                start,
                length,
            });
        }
    }
    TreeLayout { attributes, intervals }
}

/// Column-major feature matrix: `columns[j * a + q][series]`.
pub fn build_feature_matrix(reps: &[SeriesRepresentations], layout: &TreeLayout) -> Vec<Vec<f64>> {
    let a = layout.attributes.len();
    let mut columns = vec![vec![0.0; reps.len()]; layout.n_features()];
    for (j, iv) in layout.intervals.iter().enumerate() {
        for (i, r) in reps.iter().enumerate() {
            let seg = Segment::new(iv.slice(r));
            for (q, &attr) in layout.attributes.iter().enumerate() {
                columns[j * a + q][i] = seg.value(attr);
            }
        }
    }
    columns
}

/// Normalizes, windows and derives representations for many series.
pub fn prepare_all(
    series: &[&MultivariateSeries],
    norm: &NormalizationParams,
    window_len: usize,
) -> Result<Vec<SeriesRepresentations>> {
    series.par_iter().map(|s| prepare(s, norm, window_len)).collect()
}

/// Class index of every series, validated against `classes`.
pub(crate) fn label_indices(classes: &[String], series: &[&MultivariateSeries]) -> Result<Vec<usize>> {
    series
        .iter()
        .map(|s| {
            classes
                .iter()
                .position(|c| *c == s.label)
                .ok_or_else(|| Error::invalid(format!("series {:?} has unknown label {:?}", s.id, s.label)))
        })
        .collect()
}

/// Trains a forest on the training split of `dataset`, truncated or
/// stretched to `window_len`. Uses the dataset's normalization when a split
/// has been fixed, otherwise fits one on the training series.
pub fn fit(dataset: &Dataset, window_len: usize, config: &DrCifConfig) -> Result<DrCifModel> {
    let train = dataset.train();
    if train.is_empty() {
        return Err(Error::invalid("training split is empty"));
    }
    let norm = match &dataset.norm {
        Some(n) => n.clone(),
        None => crate::preprocess::fit_normalization(&train)?,
    };
    fit_series(
        &train,
        &dataset.classes,
        &dataset.channel_names(),
        &norm,
        window_len,
        config,
    )
}

/// Like [`fit`] on an explicit training set.
pub fn fit_series(
    train: &[&MultivariateSeries],
    classes: &[String],
    channels: &[String],
    norm: &NormalizationParams,
    window_len: usize,
    config: &DrCifConfig,
) -> Result<DrCifModel> {
    config.validate()?;
    if window_len < MIN_WINDOW {
        return Err(Error::invalid(format!(
            "window length must be at least {MIN_WINDOW}, got {window_len}"
        )));
    }
    if norm.n_channels() != channels.len() {
        return Err(Error::ChannelMismatch {
            expected: channels.len(),
            got: norm.n_channels(),
        });
    }
    let labels = label_indices(classes, train)?;
    let mut present: Vec<usize> = labels.clone();
    present.sort_unstable();
    present.dedup();
    match present.as_slice() {
        [] => return Err(Error::invalid("training split is empty")),
        [only] => return Err(Error::SingleClass(classes[*only].clone())),
        _ => {}
    }
    let reps = prepare_all(train, norm, window_len)?;
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let layout = sample_tree_layout(window_len, channels.len(), config, t);
            let columns = build_feature_matrix(&reps, &layout);
            let tree = fit_tree(&columns, &labels, classes.len());
            TreeSpec { layout, tree }
        })
        .collect();
    Ok(DrCifModel {
        format_version: MODEL_FORMAT_VERSION,
        config: config.clone(),
        classes: classes.to_vec(),
        channels: channels.to_vec(),
        window_len,
        norm: norm.clone(),
        trees,
    })
}

/// Index of the largest probability; ties go to the lowest index.
pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

impl DrCifModel {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    fn check_channels(&self, series: &MultivariateSeries) -> Result<()> {
        if series.n_channels() != self.n_channels() {
            return Err(Error::ChannelMismatch {
                expected: self.n_channels(),
                got: series.n_channels(),
            });
        }
        Ok(())
    }

    /// Normalizes and windows a raw series for this model.
    pub fn prepare(&self, series: &MultivariateSeries) -> Result<SeriesRepresentations> {
        self.check_channels(series)?;
        prepare(series, &self.norm, self.window_len)
    }

    /// Number of trees voting for each class.
    pub fn votes_prepared(&self, reps: &SeriesRepresentations) -> Vec<usize> {
        let mut votes = vec![0; self.n_classes()];
        for t in &self.trees {
            votes[t.predict_prepared(reps)] += 1;
        }
        votes
    }

    pub fn predict_proba_prepared(&self, reps: &SeriesRepresentations) -> Vec<f64> {
        let n = self.trees.len() as f64;
        self.votes_prepared(reps).into_iter().map(|v| v as f64 / n).collect()
    }

    pub fn predict_proba(&self, series: &MultivariateSeries) -> Result<Vec<f64>> {
        Ok(self.predict_proba_prepared(&self.prepare(series)?))
    }

    pub fn predict(&self, series: &MultivariateSeries) -> Result<String> {
        let p = self.predict_proba(series)?;
        Ok(self.classes[argmax(&p)].clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: DrCifModel = serde_json::from_str(text).map_err(|e| Error::invalid(format!("model: {e}")))?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model format version {}",
                model.format_version
            )));
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_counts_follow_formula() {
        assert_eq!(interval_count(100, 12, 3), 15);
        assert_eq!(interval_count(5, 12, 3), 6);
        assert_eq!(interval_count(2, 12, 3), 0);
        assert_eq!(interval_count(3, 1, 3), 4);
    }

    #[test]
    fn max_len_bounds() {
        let c = DrCifConfig::default();
        assert_eq!(max_interval_len(100, &c), 50);
        assert_eq!(max_interval_len(5, &c), 3);
        assert_eq!(max_interval_len(3, &c), 3);
    }

    #[test]
    fn layout_is_reproducible_and_valid() {
        let c = DrCifConfig::default().with_seed(7);
        let a = sample_tree_layout(10, 12, &c, 3);
        assert_eq!(a, sample_tree_layout(10, 12, &c, 3));
        assert_ne!(a, sample_tree_layout(10, 12, &c, 4));
        assert_eq!(a.attributes.len(), 10);
        let mut attrs = a.attributes.clone();
        attrs.sort();
        attrs.dedup();
        assert_eq!(attrs.len(), 10);
        assert_eq!(
            a.interval_counts(),
            [
                interval_count(10, 12, 3),
                interval_count(9, 12, 3),
                interval_count(5, 12, 3)
            ]
        );
        for iv in &a.intervals {
            let len = iv.representation.length(10);
            assert!(iv.length >= 3 && iv.start + iv.length <= len);
            assert!(iv.length <= max_interval_len(len, &c));
            assert!(iv.channel < 12);
        }
    }

    #[test]
    fn width_is_attributes_times_intervals() {
        let c = DrCifConfig::default();
        let l = sample_tree_layout(100, 12, &c, 0);
        let k = l.interval_counts();
        assert_eq!(k, [15, 15, 4 + ((50f64).sqrt() * 12f64.sqrt() / 3.0) as usize]);
        assert_eq!(k, [15, 15, 12]);
        assert_eq!(l.n_features(), 420);
    }

    #[test]
    fn argmax_ties_low() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
        assert_eq!(argmax(&[0.6, 0.4]), 0);
    }
}
