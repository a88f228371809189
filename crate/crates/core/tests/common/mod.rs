#![allow(dead_code)]

use xmtc_core::synth::{synthesize, SynthConfig};
use xmtc_core::{Dataset, DrCifConfig, MultivariateSeries};

/// Short 4-class synthetic dataset (2 objects, both sides) that trains in
/// well under a second per window.
pub fn small_config(seed: u64) -> SynthConfig {
    SynthConfig {
        id: "small".into(),
        objects: vec!["cup".into(), "pen".into()],
        series_per_class: 8,
        n_channels: 3,
        length_mean: 45.0,
        length_std: 6.0,
        length_min: 35,
        length_max: 55,
        t_side: 5,
        t_obj: 20,
        n_groups: 4,
        seed,
        ..SynthConfig::default()
    }
}

pub fn small_dataset(seed: u64) -> Dataset {
    synthesize(&small_config(seed)).unwrap()
}

pub fn forest(n_trees: usize, seed: u64) -> DrCifConfig {
    DrCifConfig::default().with_trees(n_trees).with_seed(seed)
}

pub fn series(id: &str, label: &str, values: Vec<Vec<f64>>) -> MultivariateSeries {
    MultivariateSeries::new(id, "g", label, values).unwrap()
}
