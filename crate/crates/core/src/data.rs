//! Domain types shared by every stage of the pipeline.
//!
//! A [`Dataset`] owns raw (un-normalized) recordings. Splitting a dataset
//! fixes the train/test partition and derives [`NormalizationParams`] from the
//! training side only; everything downstream consumes those parameters.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::N_ATTRIBUTES;
use crate::preprocess;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub index: usize,
    pub name: String,
}

/// One recording: `D` channels of equal length `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultivariateSeries {
    pub id: String,
    pub group: String,
    pub label: String,
    /// `values[channel][t]`
    pub values: Vec<Vec<f64>>,
}

impl MultivariateSeries {
    pub fn new(
        id: impl Into<String>,
        group: impl Into<String>,
        label: impl Into<String>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let s = Self {
            id: id.into(),
            group: group.into(),
            label: label.into(),
            values,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let len = self.len();
        if self.values.is_empty() || len == 0 {
            return Err(Error::invalid(format!("series {:?} is empty", self.id)));
        }
        for ch in &self.values {
            if ch.len() != len {
                return Err(Error::invalid(format!(
                    "series {:?} has channels of unequal length",
                    self.id
                )));
            }
            if let Some(t) = ch.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    series_id: self.id.clone(),
                    t,
                });
            }
        }
        Ok(())
    }

    pub fn n_channels(&self) -> usize {
        self.values.len()
    }

    /// Number of time steps.
    pub fn len(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same identity, different values.
    pub fn with_values(&self, values: Vec<Vec<f64>>) -> Self {
        Self {
            id: self.id.clone(),
            group: self.group.clone(),
            label: self.label.clone(),
            values,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Per-channel `(min, max)` scaling derived from the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormalizationParams {
    pub fn n_channels(&self) -> usize {
        self.min.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub id: String,
    pub channels: Vec<ChannelSpec>,
    /// Defines the index order of every probability vector.
    pub classes: Vec<String>,
    pub series: Vec<MultivariateSeries>,
    /// Parallel to `series`.
    pub split: Vec<Split>,
    /// Present once a split has been fixed.
    pub norm: Option<NormalizationParams>,
}

impl Dataset {
    /// Builds a dataset whose class order is the lexicographic order of the
    /// labels present. Every series starts in the training split.
    pub fn new(id: impl Into<String>, channel_names: Vec<String>, series: Vec<MultivariateSeries>) -> Result<Self> {
        let mut classes: Vec<String> = series.iter().map(|s| s.label.clone()).collect();
        classes.sort();
        classes.dedup();
        Self::with_classes(id, channel_names, classes, series)
    }

    /// Like [`Dataset::new`] but with an explicit class order.
    pub fn with_classes(
        id: impl Into<String>,
        channel_names: Vec<String>,
        classes: Vec<String>,
        series: Vec<MultivariateSeries>,
    ) -> Result<Self> {
        let id = id.into();
        let mut seen = HashSet::new();
        for name in &channel_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::invalid(format!("duplicate channel name {name:?}")));
            }
        }
        let mut seen_classes = HashSet::new();
        for c in &classes {
            if !seen_classes.insert(c.as_str()) {
                return Err(Error::invalid(format!("duplicate class {c:?}")));
            }
        }
        let mut ids = HashSet::new();
        for s in &series {
            s.validate()?;
            if s.n_channels() != channel_names.len() {
                return Err(Error::ChannelMismatch {
                    expected: channel_names.len(),
                    got: s.n_channels(),
                });
            }
            if !seen_classes.contains(s.label.as_str()) {
                return Err(Error::invalid(format!(
                    "series {:?} has unknown label {:?}",
                    s.id, s.label
                )));
            }
            if !ids.insert(s.id.as_str()) {
                return Err(Error::invalid(format!("duplicate series id {:?}", s.id)));
            }
        }
        let channels = channel_names
            .into_iter()
            .enumerate()
            .map(|(index, name)| ChannelSpec { index, name })
            .collect();
        let split = vec![Split::Train; series.len()];
        Ok(Self {
            id,
            channels,
            classes,
            series,
            split,
            norm: None,
        })
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn channel_names(&self) -> Vec<String> {
        self.channels.iter().map(|c| c.name.clone()).collect()
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == label)
    }

    pub fn series_by_id(&self, id: &str) -> Option<&MultivariateSeries> {
        self.series.iter().find(|s| s.id == id)
    }

    pub fn iter_split(&self, which: Split) -> impl Iterator<Item = &MultivariateSeries> {
        self.series
            .iter()
            .zip(&self.split)
            .filter(move |(_, s)| **s == which)
            .map(|(series, _)| series)
    }

    pub fn train(&self) -> Vec<&MultivariateSeries> {
        self.iter_split(Split::Train).collect()
    }

    pub fn test(&self) -> Vec<&MultivariateSeries> {
        self.iter_split(Split::Test).collect()
    }

    /// Fixes the split and fits normalization on its training side.
    pub fn with_split(mut self, split: Vec<Split>) -> Result<Self> {
        if split.len() != self.series.len() {
            return Err(Error::invalid(format!(
                "split has {} tags for {} series",
                split.len(),
                self.series.len()
            )));
        }
        self.split = split;
        let train = self.train();
        if train.is_empty() {
            return Err(Error::invalid("split leaves the training set empty"));
        }
        let norm = preprocess::fit_normalization(&train)?;
        self.norm = Some(norm);
        Ok(self)
    }

    /// Keeps only the series accepted by `keep`; split tags and normalization
    /// are carried over unchanged.
    pub fn filtered(&self, mut keep: impl FnMut(&MultivariateSeries, Split) -> bool) -> Self {
        let (series, split): (Vec<_>, Vec<_>) = self
            .series
            .iter()
            .zip(&self.split)
            .filter(|(s, t)| keep(s, **t))
            .map(|(s, t)| (s.clone(), *t))
            .unzip();
        Self {
            id: self.id.clone(),
            channels: self.channels.clone(),
            classes: self.classes.clone(),
            series,
            split,
            norm: self.norm.clone(),
        }
    }

    /// Number of series per class, in class order.
    pub fn class_counts(&self, which: Option<Split>) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for (s, t) in self.series.iter().zip(&self.split) {
            if which.is_none_or(|w| w == *t) {
                if let Some(i) = self.class_index(&s.label) {
                    counts[i] += 1;
                }
            }
        }
        counts
    }

    pub fn max_len(&self) -> usize {
        self.series.iter().map(|s| s.len()).max().unwrap_or(0)
    }

    pub fn groups(&self) -> Vec<String> {
        let mut g: Vec<String> = self.series.iter().map(|s| s.group.clone()).collect();
        g.sort();
        g.dedup();
        g
    }
}

/// Per class, shuffles the members with a generator seeded by `seed` and
/// sends the first `round(test_frac * n)` of them to the test split.
pub fn stratified_split(dataset: Dataset, test_frac: f64, seed: u64) -> Result<Dataset> {
    if !(test_frac > 0.0 && test_frac < 1.0) {
        return Err(Error::invalid(format!(
            "test fraction must lie in (0, 1), got {test_frac}"
        )));
    }
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, s) in dataset.series.iter().enumerate() {
        let c = dataset.class_index(&s.label).expect("labels validated at construction");
        members.entry(c).or_default().push(i);
    }
    for (c, name) in dataset.classes.iter().enumerate() {
        let n = members.get(&c).map_or(0, Vec::len);
        if n < 2 {
            return Err(Error::invalid(format!(
                "class {name:?} has {n} series; stratified split needs at least 2"
            )));
        }
    }
    let mut rng = rng::stream(seed, rng::SPLIT_STREAM);
    let mut split = vec![Split::Train; dataset.series.len()];
    for idx in members.values_mut() {
        idx.shuffle(&mut rng);
        let n = idx.len();
        let n_test = ((test_frac * n as f64).round() as usize).min(n - 1);
        for &i in &idx[..n_test] {
            split[i] = Split::Test;
        }
    }
    dataset.with_split(split)
}

/// Ensemble hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrCifConfig {
    pub n_trees: usize,
    /// Attributes drawn per tree from the candidate pool.
    pub attributes_per_tree: usize,
    pub min_interval_len: usize,
    pub max_interval_frac: f64,
    pub seed: u64,
}

impl Default for DrCifConfig {
    fn default() -> Self {
        Self {
            n_trees: 200,
            attributes_per_tree: 10,
            min_interval_len: 3,
            max_interval_frac: 0.5,
            seed: 0,
        }
    }
}

impl DrCifConfig {
    pub fn with_trees(mut self, n_trees: usize) -> Self {
        self.n_trees = n_trees;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::invalid("n_trees must be at least 1"));
        }
        if self.attributes_per_tree == 0 || self.attributes_per_tree > N_ATTRIBUTES {
            return Err(Error::invalid(format!(
                "attributes per tree must lie in 1..={N_ATTRIBUTES}, got {}",
                self.attributes_per_tree
            )));
        }
        if self.min_interval_len < 3 {
            return Err(Error::invalid("min_interval_len must be at least 3"));
        }
        if !(self.max_interval_frac > 0.0 && self.max_interval_frac <= 1.0) {
            return Err(Error::invalid("max_interval_frac must lie in (0, 1]"));
        }
        Ok(())
    }
}
