//! Synthetic reach-to-grasp-like recordings.
//!
//! Classes are `{side}_{object}` with side `l`/`r`. Every channel starts as
//! an offset plus two slow sinusoids with per-series phases and amplitudes.
//! From `t_side` on, the z channels of right-side series are negated; from
//! `t_obj` on, the x and y channels are scaled by a factor that depends on
//! the object. Gaussian noise is added last. Before `t_obj` the objects are
//! therefore indistinguishable, before `t_side` nothing is.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{stratified_split, Dataset, MultivariateSeries};
use crate::error::{Error, Result};
use crate::rng;

pub const APERTURES: [&str; 4] = ["tia", "tma", "tra", "tla"];
pub const COMPONENTS: [&str; 3] = ["x", "y", "z"];
pub const SIDES: [&str; 2] = ["l", "r"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub id: String,
    pub objects: Vec<String>,
    pub series_per_class: usize,
    pub n_channels: usize,
    pub length_mean: f64,
    pub length_std: f64,
    pub length_min: usize,
    pub length_max: usize,
    pub t_side: usize,
    pub t_obj: usize,
    pub noise_std: f64,
    pub n_groups: usize,
    pub test_frac: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            id: "synth".into(),
            objects: ["bottle", "cup", "knife", "pen"].map(String::from).to_vec(),
            series_per_class: 30,
            n_channels: 12,
            length_mean: 300.0,
            length_std: 30.0,
            length_min: 250,
            length_max: 350,
            t_side: 10,
            t_obj: 150,
            noise_std: 0.05,
            n_groups: 6,
            test_frac: 0.3,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.objects.len() < 2 {
            return Err(Error::invalid("at least two objects are required"));
        }
        let mut objects = self.objects.clone();
        objects.sort();
        objects.dedup();
        if objects.len() != self.objects.len() {
            return Err(Error::invalid("object names must be distinct"));
        }
        if self.series_per_class < 2 {
            return Err(Error::invalid("at least two series per class are required"));
        }
        if self.n_channels == 0 {
            return Err(Error::invalid("at least one channel is required"));
        }
        if !(self.t_side < self.t_obj && self.t_obj < self.length_min) {
            return Err(Error::invalid(format!(
                "need t_side < t_obj < length_min, got {} / {} / {}",
                self.t_side, self.t_obj, self.length_min
            )));
        }
        if self.length_min > self.length_max {
            return Err(Error::invalid("length_min exceeds length_max"));
        }
        if !(self.noise_std >= 0.0 && self.length_std >= 0.0) {
            return Err(Error::invalid("standard deviations must be non-negative"));
        }
        if self.n_groups == 0 {
            return Err(Error::invalid("at least one group is required"));
        }
        Ok(())
    }

    /// Lexicographic, like every dataset's class order.
    pub fn class_names(&self) -> Vec<String> {
        let mut names: Vec<String> = SIDES
            .iter()
            .flat_map(|s| self.objects.iter().map(move |o| format!("{s}_{o}")))
            .collect();
        names.sort();
        names
    }

    /// `tiax, tiay, ..., tlaz` for 12 channels, `ch0, ch1, ...` otherwise.
    pub fn channel_names(&self) -> Vec<String> {
        if self.n_channels == APERTURES.len() * COMPONENTS.len() {
            APERTURES
                .iter()
                .flat_map(|a| COMPONENTS.iter().map(move |c| format!("{a}{c}")))
                .collect()
        } else {
            (0..self.n_channels).map(|i| format!("ch{i}")).collect()
        }
    }

    /// Per-object scale applied to the x/y channels, evenly spaced in
    /// `[0.5, 2.0]`.
    pub fn object_factor(&self, object: usize) -> f64 {
        let n = self.objects.len();
        0.5 + 1.5 * object as f64 / (n - 1) as f64
    }
}

/// Whether channel `c` plays the role of a z component.
pub fn is_z_channel(c: usize) -> bool {
    c % 3 == 2
}

/// Generates the dataset and fixes a stratified split.
pub fn synthesize(cfg: &SynthConfig) -> Result<Dataset> {
    cfg.validate()?;
    let base_seed = rng::mix(cfg.seed, rng::SYNTH_STREAM);
    let length_dist = Normal::new(cfg.length_mean, cfg.length_std)
        .map_err(|e| Error::invalid(format!("length distribution: {e}")))?;
    let noise = Normal::new(0.0, cfg.noise_std).map_err(|e| Error::invalid(format!("noise distribution: {e}")))?;
    let mut series = Vec::new();
    let mut index = 0u64;
    for (side, side_name) in SIDES.iter().enumerate() {
        for (object, object_name) in cfg.objects.iter().enumerate() {
            let label = format!("{side_name}_{object_name}");
            for j in 0..cfg.series_per_class {
                let mut r = rng::stream(base_seed, index);
                index += 1;
                let raw: f64 = length_dist.sample(&mut r);
                let len = (raw.round().max(0.0) as usize).clamp(cfg.length_min, cfg.length_max);
                let factor = cfg.object_factor(object);
                let values = (0..cfg.n_channels)
                    .map(|c| {
                        let a1 = r.random_range(0.1..0.3);
                        let a2 = r.random_range(0.05..0.15);
                        let p1 = r.random_range(0.0..TAU);
                        let p2 = r.random_range(0.0..TAU);
                        let period1 = 180.0 + 15.0 * c as f64;
                        let period2 = 70.0 + 5.0 * c as f64;
                        (0..len)
                            .map(|t| {
                                let tf = t as f64;
                                let mut v =
                                    1.0 + a1 * (TAU * tf / period1 + p1).sin() + a2 * (TAU * tf / period2 + p2).sin();
                                if is_z_channel(c) {
                                    if side == 1 && t >= cfg.t_side {
                                        v = -v;
                                    }
                                } else if t >= cfg.t_obj {
                                    v *= factor;
                                }
                                v + noise.sample(&mut r)
                            })
                            .collect()
                    })
                    .collect();
                let group = format!("u{}", j % cfg.n_groups + 1);
                series.push(MultivariateSeries::new(
                    format!("{label}-{j:03}"),
                    group,
                    label.clone(),
                    values,
                )?);
            }
        }
    }
    let ds = Dataset::with_classes(cfg.id.clone(), cfg.channel_names(), cfg.class_names(), series)?;
    stratified_split(ds, cfg.test_frac, cfg.seed)
}
