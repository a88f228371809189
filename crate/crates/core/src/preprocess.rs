//! Normalization, window truncation/stretching and the three series
//! representations (base, first difference, periodogram).

use std::cell::RefCell;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::data::{MultivariateSeries, NormalizationParams};
use crate::error::{Error, Result};

/// Per-channel min/max over every training value. A constant channel gets
/// `(v, v + 1)` so that it maps to 0.
pub fn fit_normalization(train: &[&MultivariateSeries]) -> Result<NormalizationParams> {
    let first = train
        .first()
        .ok_or_else(|| Error::invalid("cannot fit normalization on an empty training set"))?;
    let d = first.n_channels();
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for s in train {
        if s.n_channels() != d {
            return Err(Error::ChannelMismatch {
                expected: d,
                got: s.n_channels(),
            });
        }
        for (c, ch) in s.values.iter().enumerate() {
            for &v in ch {
                min[c] = min[c].min(v);
                max[c] = max[c].max(v);
            }
        }
    }
    for c in 0..d {
        if min[c] >= max[c] {
            max[c] = min[c] + 1.0;
        }
    }
    Ok(NormalizationParams { min, max })
}

/// `clamp((v - min) / (max - min), 0, 1)` per channel.
pub fn apply_normalization(series: &MultivariateSeries, params: &NormalizationParams) -> Result<MultivariateSeries> {
    if series.n_channels() != params.n_channels() {
        return Err(Error::ChannelMismatch {
            expected: params.n_channels(),
            got: series.n_channels(),
        });
    }
    let values = series
        .values
        .iter()
        .enumerate()
        .map(|(c, ch)| {
            let (lo, hi) = (params.min[c], params.max[c]);
            let span = hi - lo;
            ch.iter().map(|&v| ((v - lo) / span).clamp(0.0, 1.0)).collect()
        })
        .collect();
    Ok(series.with_values(values))
}

/// Truncates a channel to its first `window_len` steps, or stretches it by
/// linear interpolation onto `j * (L - 1) / (W - 1)` when it is shorter.
pub fn window_channel(channel: &[f64], window_len: usize) -> Vec<f64> {
    let len = channel.len();
    assert!(len > 0 && window_len > 0, "window of an empty channel");
    if len >= window_len {
        return channel[..window_len].to_vec();
    }
    if len == 1 {
        return vec![channel[0]; window_len];
    }
    let last = len - 1;
    let denom = (window_len - 1) as f64;
    (0..window_len)
        .map(|j| {
            let pos = (j * last) as f64 / denom;
            let i0 = pos.floor() as usize;
            if i0 >= last {
                channel[last]
            } else {
                let frac = pos - i0 as f64;
                channel[i0] + frac * (channel[i0 + 1] - channel[i0])
            }
        })
        .collect()
}

pub fn to_window(series: &MultivariateSeries, window_len: usize) -> MultivariateSeries {
    let values = series.values.iter().map(|ch| window_channel(ch, window_len)).collect();
    series.with_values(values)
}

/// `d[t] = v[t + 1] - v[t]`
pub fn first_difference(channel: &[f64]) -> Result<Vec<f64>> {
    if channel.len() < 2 {
        return Err(Error::invalid("first difference needs at least 2 values"));
    }
    Ok(channel.windows(2).map(|w| w[1] - w[0]).collect())
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Forward DFT of a real signal, via a cached per-thread planner.
pub(crate) fn dft(signal: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = signal.iter().map(|&v| Complex::new(v, 0.0)).collect();
    if buf.is_empty() {
        return buf;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(&mut buf);
    buf
}

/// DFT magnitudes `|X_k|` for `k = 0 .. floor(L / 2)`, DC term included.
pub fn periodogram(channel: &[f64]) -> Result<Vec<f64>> {
    if channel.len() < 2 {
        return Err(Error::invalid("periodogram needs at least 2 values"));
    }
    let spectrum = dft(channel);
    Ok(spectrum[..channel.len() / 2].iter().map(|x| x.norm()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepresentationKind {
    Base,
    Diff,
    Periodogram,
}

impl RepresentationKind {
    pub const ALL: [RepresentationKind; 3] = [
        RepresentationKind::Base,
        RepresentationKind::Diff,
        RepresentationKind::Periodogram,
    ];

    /// Length of this representation for a base series of length `len`.
    pub fn length(self, len: usize) -> usize {
        match self {
            RepresentationKind::Base => len,
            RepresentationKind::Diff => len.saturating_sub(1),
            RepresentationKind::Periodogram => len / 2,
        }
    }
}

/// One representation of a windowed series, `values[channel][t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub kind: RepresentationKind,
    pub values: Vec<Vec<f64>>,
}

/// The three representations of an already windowed series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRepresentations {
    pub base: Representation,
    pub diff: Representation,
    pub periodogram: Representation,
}

impl SeriesRepresentations {
    pub fn new(values: &[Vec<f64>]) -> Result<Self> {
        let diff = values.iter().map(|c| first_difference(c)).collect::<Result<_>>()?;
        let per = values.iter().map(|c| periodogram(c)).collect::<Result<_>>()?;
        Ok(Self {
            base: Representation {
                kind: RepresentationKind::Base,
                values: values.to_vec(),
            },
            diff: Representation {
                kind: RepresentationKind::Diff,
                values: diff,
            },
            periodogram: Representation {
                kind: RepresentationKind::Periodogram,
                values: per,
            },
        })
    }

    pub fn get(&self, kind: RepresentationKind) -> &Representation {
        match kind {
            RepresentationKind::Base => &self.base,
            RepresentationKind::Diff => &self.diff,
            RepresentationKind::Periodogram => &self.periodogram,
        }
    }
}

/// Normalizes, windows, and derives all representations of one series.
pub fn prepare(
    series: &MultivariateSeries,
    norm: &NormalizationParams,
    window_len: usize,
) -> Result<SeriesRepresentations> {
    let normalized = apply_normalization(series, norm)?;
    let windowed = to_window(&normalized, window_len);
    SeriesRepresentations::new(&windowed.values)
}
