use std::path::Path;

use serde::{Deserialize, Serialize};
use xmtc_core::io::load_dataset;
use xmtc_core::{stratified_split, Dataset, Result, Split};

/// Split used for datasets whose manifest does not fix one.
pub const DEFAULT_TEST_FRAC: f64 = 0.3;
pub const DEFAULT_SPLIT_SEED: u64 = 0;

/// Loads a dataset directory and fixes the default split if it has none.
pub fn load_prepared(dir: &Path) -> Result<Dataset> {
    load_with_split(dir, DEFAULT_TEST_FRAC, DEFAULT_SPLIT_SEED)
}

pub fn load_with_split(dir: &Path, test_frac: f64, split_seed: u64) -> Result<Dataset> {
    let ds = load_dataset(dir)?;
    if ds.norm.is_some() {
        Ok(ds)
    } else {
        stratified_split(ds, test_frac, split_seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub id: String,
    pub classes: Vec<String>,
    pub channels: Vec<String>,
    pub n_series: usize,
    pub n_test: usize,
}

pub fn summarize(id: &str, ds: &Dataset) -> DatasetSummary {
    DatasetSummary {
        id: id.to_string(),
        classes: ds.classes.clone(),
        channels: ds.channel_names(),
        n_series: ds.series.len(),
        n_test: ds.iter_split(Split::Test).count(),
    }
}
