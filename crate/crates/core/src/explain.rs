//! Partial dependence of a window model's class probabilities on one
//! channel. The channel is replaced, after normalization and windowing, by
//! a constant `v` taken from an even grid on `[0, 1]`; the curve at `v` is the
//! mean predicted probability over the evaluation series.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::MultivariateSeries;
use crate::drcif::DrCifModel;
use crate::error::{Error, Result};
use crate::preprocess::{apply_normalization, first_difference, periodogram, to_window, SeriesRepresentations};

pub const DEFAULT_GRID_SIZE: usize = 20;

/// `i / (size - 1)` for `i in 0..size`.
pub fn pdp_grid(size: usize) -> Result<Vec<f64>> {
    if size < 2 {
        return Err(Error::invalid(format!("PDP grid needs at least 2 points, got {size}")));
    }
    Ok((0..size).map(|i| i as f64 / (size - 1) as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelPdp {
    pub channel: usize,
    pub name: String,
    /// `curves[class][grid point]`
    pub curves: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdpSurface {
    pub window_len: usize,
    pub n_series: usize,
    pub grid: Vec<f64>,
    pub classes: Vec<String>,
    pub channels: Vec<ChannelPdp>,
}

fn tree_channels(model: &DrCifModel) -> Vec<Vec<bool>> {
    model
        .trees
        .iter()
        .map(|t| {
            let mut used = vec![false; model.n_channels()];
            for f in t.tree.used_features() {
                let (j, _) = t.layout.feature(f);
                used[t.layout.intervals[j].channel] = true;
            }
            used
        })
        .collect()
}

fn replace_channel(
    reps: &SeriesRepresentations,
    channel: usize,
    v: f64,
    window_len: usize,
) -> Result<SeriesRepresentations> {
    let mut out = reps.clone();
    let flat = vec![v; window_len];
    out.diff.values[channel] = first_difference(&flat)?;
    out.periodogram.values[channel] = periodogram(&flat)?;
    out.base.values[channel] = flat;
    Ok(out)
}

/// Partial dependence curves of every class on `channel`.
pub fn partial_dependence(
    model: &DrCifModel,
    eval: &[&MultivariateSeries],
    channel: usize,
    grid: &[f64],
) -> Result<ChannelPdp> {
    if channel >= model.n_channels() {
        return Err(Error::invalid(format!(
            "channel {channel} out of range for {} channels",
            model.n_channels()
        )));
    }
    if eval.is_empty() {
        return Err(Error::invalid("PDP needs at least one evaluation series"));
    }
    let uses = tree_channels(model);
    let n_classes = model.n_classes();
    let w = model.window_len;
    let per_series: Vec<Vec<Vec<usize>>> = eval
        .par_iter()
        .map(|s| -> Result<Vec<Vec<usize>>> {
            let reps = model.prepare(s)?;
            // trees that never read the channel vote the same for every v
            let mut fixed = vec![0usize; n_classes];
            for (t, u) in model.trees.iter().zip(&uses) {
                if !u[channel] {
                    fixed[t.predict_prepared(&reps)] += 1;
                }
            }
            grid.iter()
                .map(|&v| {
                    let swapped = replace_channel(&reps, channel, v, w)?;
                    let mut votes = fixed.clone();
                    for (t, u) in model.trees.iter().zip(&uses) {
                        if u[channel] {
                            votes[t.predict_prepared(&swapped)] += 1;
                        }
                    }
                    Ok(votes)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let denom = (model.trees.len() * eval.len()) as f64;
    let curves = (0..n_classes)
        .map(|c| {
            (0..grid.len())
                .map(|g| per_series.iter().map(|s| s[g][c]).sum::<usize>() as f64 / denom)
                .collect()
        })
        .collect();
    Ok(ChannelPdp {
        channel,
        name: model.channels[channel].clone(),
        curves,
    })
}

/// Partial dependence on every channel.
pub fn pdp_surface(model: &DrCifModel, eval: &[&MultivariateSeries], grid_size: usize) -> Result<PdpSurface> {
    let grid = pdp_grid(grid_size)?;
    let channels = (0..model.n_channels())
        .map(|c| partial_dependence(model, eval, c, &grid))
        .collect::<Result<_>>()?;
    Ok(PdpSurface {
        window_len: model.window_len,
        n_series: eval.len(),
        grid,
        classes: model.classes.clone(),
        channels,
    })
}

/// The windowed, normalized values a PDP starts from; exposed for checks.
pub fn normalized_window(model: &DrCifModel, series: &MultivariateSeries) -> Result<MultivariateSeries> {
    Ok(to_window(&apply_normalization(series, &model.norm)?, model.window_len))
}
