//! The 22 catch22 features. Each kernel follows the reference C
//! implementation step for step, so that edge cases (ties, short inputs,
//! degenerate histograms) resolve the same way. Kernels may return NaN or
//! infinities; [`super::Segment::value`] maps those to 0.
//!
//! Unlike the reference driver, the segment is not z-scored first, except
//! for the two outlier-inclusion features whose thresholds are expressed in
//! standard deviations.

// Index loops and negated comparisons (NaN falls through) follow the
// reference code.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::f64::consts::E;

use super::spline::splinefit;
use super::summary::std_with_mean;
use super::Segment;
use crate::preprocess::dft;

pub const N_CATCH22: usize = 22;

pub const CATCH22_NAMES: [&str; N_CATCH22] = [
    "DN_HistogramMode_5",
    "DN_HistogramMode_10",
    "CO_f1ecac",
    "CO_FirstMin_ac",
    "CO_HistogramAMI_even_2_5",
    "CO_trev_1_num",
    "MD_hrv_classic_pnn40",
    "SB_BinaryStats_mean_longstretch1",
    "SB_TransitionMatrix_3ac_sumdiagcov",
    "PD_PeriodicityWang_th0_01",
    "CO_Embed2_Dist_tau_d_expfit_meandiff",
    "IN_AutoMutualInfoStats_40_gaussian_fmmi",
    "FC_LocalSimple_mean1_tauresrat",
    "DN_OutlierInclude_p_001_mdrmd",
    "DN_OutlierInclude_n_001_mdrmd",
    "SP_Summaries_welch_rect_area_5_1",
    "SB_BinaryStats_diff_longstretch0",
    "SB_MotifThree_quantile_hh",
    "SC_FluctAnal_2_rsrangefit_50_1_logi_prop_r1",
    "SC_FluctAnal_2_dfa_50_1_2_logi_prop_r1",
    "SP_Summaries_welch_rect_centroid",
    "FC_LocalSimple_mean3_stderr",
];

pub(crate) fn evaluate(seg: &Segment<'_>, which: usize) -> f64 {
    let y = seg.values();
    if y.len() < 3 {
        return f64::NAN;
    }
    match which {
        0 => histogram_mode(y, 5),
        1 => histogram_mode(y, 10),
        2 => f1ecac(y.len(), seg.acf()),
        3 => first_min_ac(y.len(), seg.acf()),
        4 => histogram_ami_even_2_5(y),
        5 => trev_1_num(y),
        6 => hrv_classic_pnn40(y),
        7 => binary_stats_mean_longstretch1(y, seg.mean()),
        8 => transition_matrix_3ac_sumdiagcov(y, seg.acf()),
        9 => periodicity_wang_th0_01(y),
        10 => embed2_dist_tau_d_expfit_meandiff(y, seg.acf()),
        11 => auto_mutual_info_40_gaussian_fmmi(y),
        12 => local_simple_mean1_tauresrat(y, seg.acf()),
        13 => outlier_include(y, seg.mean(), 1.0),
        14 => outlier_include(y, seg.mean(), -1.0),
        15 => welch_rect(y, seg.mean(), WelchSummary::Area5_1),
        16 => binary_stats_diff_longstretch0(y),
        17 => motif_three_quantile_hh(y, seg.sorted()),
        18 => fluct_anal(y, 1, Fluct::RsRange),
        19 => fluct_anal(y, 2, Fluct::Dfa),
        20 => welch_rect(y, seg.mean(), WelchSummary::Centroid),
        21 => local_simple_mean_stderr(y, 3),
        _ => unreachable!("catch22 index {which}"),
    }
}

fn mean(y: &[f64]) -> f64 {
    y.iter().sum::<f64>() / y.len() as f64
}

fn stddev(y: &[f64]) -> f64 {
    let m = mean(y);
    let ss: f64 = y.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (y.len() as f64 - 1.0)).sqrt()
}

fn min_max(y: &[f64]) -> (f64, f64) {
    let mut lo = y[0];
    let mut hi = y[0];
    for &v in &y[1..] {
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }
    (lo, hi)
}

/// Median as the reference computes it: middle value, or mean of the two
/// middle values.
fn median(values: &[f64]) -> f64 {
    let mut b = values.to_vec();
    b.sort_by(f64::total_cmp);
    let n = b.len();
    if n % 2 == 1 {
        b[n / 2]
    } else {
        (b[n / 2] + b[n / 2 - 1]) / 2.0
    }
}

/// Normalized autocorrelation `sum (y_i - m)(y_{i+k} - m) / sum (y_i - m)^2`,
/// extended lazily one lag at a time. NaN at every lag for a constant input.
pub struct Acf {
    centered: Vec<f64>,
    denom: f64,
    lags: RefCell<Vec<f64>>,
}

impl Acf {
    pub fn new(y: &[f64]) -> Self {
        let m = mean(y);
        let centered: Vec<f64> = y.iter().map(|v| v - m).collect();
        let denom = centered.iter().map(|v| v * v).sum();
        Self {
            centered,
            denom,
            lags: RefCell::new(Vec::new()),
        }
    }

    pub fn lag(&self, k: usize) -> f64 {
        let n = self.centered.len();
        if k >= n {
            return if self.denom == 0.0 { f64::NAN } else { 0.0 };
        }
        let mut lags = self.lags.borrow_mut();
        while lags.len() <= k {
            let t = lags.len();
            let c = &self.centered;
            let num: f64 = c[..n - t].iter().zip(&c[t..]).map(|(a, b)| a * b).sum();
            lags.push(num / self.denom);
        }
        lags[k]
    }

    /// First lag whose autocorrelation is not positive, capped at `max_tau`.
    pub fn first_zero(&self, max_tau: usize) -> usize {
        let mut ind = 0;
        while ind < max_tau && self.lag(ind) > 0.0 {
            ind += 1;
        }
        ind
    }
}

/// Equal-width histogram over `[min, max]`; returns counts and bin step.
fn histcounts(y: &[f64], n_bins: usize) -> (Vec<usize>, f64, f64) {
    let (lo, hi) = min_max(y);
    let step = (hi - lo) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &v in y {
        // float-to-int conversion truncates, NaN becomes 0
        let ind = ((v - lo) / step) as i64;
        let ind = ind.clamp(0, n_bins as i64 - 1) as usize;
        counts[ind] += 1;
    }
    (counts, lo, step)
}

fn histogram_mode(y: &[f64], n_bins: usize) -> f64 {
    let (counts, lo, step) = histcounts(y, n_bins);
    let edge = |i: usize| i as f64 * step + lo;
    let mut max_count = 0usize;
    let mut num_maxs = 1usize;
    let mut out = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        let center = (edge(i) + edge(i + 1)) * 0.5;
        if c > max_count {
            max_count = c;
            num_maxs = 1;
            out = center;
        } else if c == max_count {
            num_maxs += 1;
            out += center;
        }
    }
    out / num_maxs as f64
}

fn f1ecac(size: usize, acf: &Acf) -> f64 {
    let thresh = 1.0 / E;
    for i in 0..size.saturating_sub(2) {
        let next = acf.lag(i + 1);
        if next < thresh {
            let cur = acf.lag(i);
            return i as f64 + (thresh - cur) / (next - cur);
        }
    }
    size as f64
}

fn first_min_ac(size: usize, acf: &Acf) -> f64 {
    for i in 1..size.saturating_sub(1) {
        let cur = acf.lag(i);
        if cur < acf.lag(i - 1) && cur < acf.lag(i + 1) {
            return i as f64;
        }
    }
    size as f64
}

fn histogram_ami_even_2_5(y: &[f64]) -> f64 {
    const TAU: usize = 2;
    const NB: usize = 5;
    if y.len() <= TAU {
        return f64::NAN;
    }
    let (lo, hi) = min_max(y);
    let step = (hi - lo + 0.2) / NB as f64;
    let edges: [f64; NB + 1] = std::array::from_fn(|i| lo + step * i as f64 - 0.1);
    let assign = |v: f64| edges.iter().position(|&e| v < e).unwrap_or(0) as i64;

    let mut joint = [0usize; (NB + 1) * (NB + 1)];
    let n = y.len() - TAU;
    for i in 0..n {
        let b12 = (assign(y[i]) - 1) * (NB as i64 + 1) + assign(y[i + TAU]);
        // first edge (1..=36) not below the combined index
        let b12 = b12 as f64;
        if let Some(j) = (0..joint.len()).find(|&j| b12 <= (j + 1) as f64) {
            joint[j] += 1;
        }
    }

    let mut pij = [[0.0f64; NB]; NB];
    let mut sum_bins = 0i64;
    for i in 0..NB {
        for j in 0..NB {
            pij[j][i] = joint[i * (NB + 1) + j] as f64;
            sum_bins += joint[i * (NB + 1) + j] as i64;
        }
    }
    for row in pij.iter_mut() {
        for p in row.iter_mut() {
            *p /= sum_bins as f64;
        }
    }
    let mut pi = [0.0f64; NB];
    let mut pj = [0.0f64; NB];
    for i in 0..NB {
        for j in 0..NB {
            pi[i] += pij[i][j];
            pj[j] += pij[i][j];
        }
    }
    let mut ami = 0.0;
    for i in 0..NB {
        for j in 0..NB {
            if pij[i][j] > 0.0 {
                ami += pij[i][j] * (pij[i][j] / (pj[j] * pi[i])).ln();
            }
        }
    }
    ami
}

fn trev_1_num(y: &[f64]) -> f64 {
    let n = y.len() - 1;
    let s: f64 = y.windows(2).map(|w| (w[1] - w[0]).powi(3)).sum();
    s / n as f64
}

fn hrv_classic_pnn40(y: &[f64]) -> f64 {
    let n = y.len() - 1;
    let count = y.windows(2).filter(|w| (w[1] - w[0]).abs() * 1000.0 > 40.0).count();
    count as f64 / n as f64
}

/// Longest run length in the reference's convention: the distance between
/// consecutive break positions, where the final position always counts as a
/// break.
fn longest_stretch(bits: impl Iterator<Item = bool>, len: usize) -> f64 {
    let mut max_stretch = 0i64;
    let mut last = 0i64;
    for (i, is_break) in bits.enumerate() {
        let i = i as i64;
        if is_break || i == len as i64 - 1 {
            let stretch = i - last;
            if stretch > max_stretch {
                max_stretch = stretch;
            }
            last = i;
        }
    }
    max_stretch as f64
}

fn binary_stats_mean_longstretch1(y: &[f64], m: f64) -> f64 {
    let n = y.len() - 1;
    longest_stretch(y[..n].iter().map(|&v| v - m <= 0.0), n)
}

fn binary_stats_diff_longstretch0(y: &[f64]) -> f64 {
    let n = y.len() - 1;
    longest_stretch(y.windows(2).map(|w| w[1] - w[0] >= 0.0), n)
}

/// Quantile as the reference defines it, including its NaN when the
/// interpolation index is an exact integer.
fn c_quantile(sorted: &[f64], q: f64) -> f64 {
    let size = sorted.len();
    let lim = 0.5 / size as f64;
    if q < lim {
        return sorted[0];
    }
    if q > 1.0 - lim {
        return sorted[size - 1];
    }
    let idx = size as f64 * q - 0.5;
    let left = idx.floor() as usize;
    let right = idx.ceil() as usize;
    sorted[left] + (idx - left as f64) * (sorted[right] - sorted[left]) / (right as f64 - left as f64)
}

/// Labels 1..=3 by tercile of the values. Values that fall in no bin (only
/// possible when a threshold is NaN) keep label 0.
fn coarsegrain3(y: &[f64], sorted: &[f64]) -> Vec<u8> {
    let mut ls = [0.0f64; 4];
    let step = 1.0 / 3.0;
    let mut acc = 0.0;
    for v in ls.iter_mut() {
        *v = acc;
        acc += step;
    }
    let mut th: [f64; 4] = std::array::from_fn(|i| c_quantile(sorted, ls[i]));
    th[0] -= 1.0;
    let mut labels = vec![0u8; y.len()];
    for i in 0..3 {
        for (l, &v) in labels.iter_mut().zip(y) {
            if v > th[i] && v <= th[i + 1] {
                *l = i as u8 + 1;
            }
        }
    }
    labels
}

fn sorted_copy(y: &[f64]) -> Vec<f64> {
    let mut s = y.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

fn transition_matrix_3ac_sumdiagcov(y: &[f64], acf: &Acf) -> f64 {
    if y.iter().all(|&v| v == y[0]) {
        return f64::NAN;
    }
    let size = y.len();
    let tau = acf.first_zero(size);
    let n_down = (size - 1) / tau + 1;
    let down: Vec<f64> = (0..n_down).map(|i| y[i * tau]).collect();
    let labels = coarsegrain3(&down, &sorted_copy(&down));
    let mut t = [[0.0f64; 3]; 3];
    for w in labels.windows(2) {
        if w[0] == 0 || w[1] == 0 {
            return f64::NAN;
        }
        t[w[0] as usize - 1][w[1] as usize - 1] += 1.0;
    }
    for row in t.iter_mut() {
        for v in row.iter_mut() {
            *v /= (n_down - 1) as f64;
        }
    }
    let mut sum = 0.0;
    for c in 0..3 {
        let col = [t[0][c], t[1][c], t[2][c]];
        let m = mean(&col);
        let cov: f64 = col.iter().map(|v| (v - m) * (v - m)).sum();
        sum += cov / 2.0;
    }
    sum
}

fn periodicity_wang_th0_01(y: &[f64]) -> f64 {
    const TH: f64 = 0.01;
    let size = y.len();
    let spline = splinefit(y);
    let sub: Vec<f64> = y.iter().zip(&spline).map(|(a, b)| a - b).collect();
    let acmax = size.div_ceil(3);
    let acf_at = |tau: usize| {
        let m = size - tau;
        let s: f64 = sub[..m].iter().zip(&sub[tau..]).map(|(a, b)| a * b).sum();
        s / m as f64
    };
    // acf[k] holds lag k + 1
    let mut acf: Vec<f64> = Vec::with_capacity(acmax);
    let mut troughs: Vec<usize> = Vec::new();
    for i in 1..acmax.saturating_sub(1) {
        while acf.len() <= i + 1 {
            acf.push(acf_at(acf.len() + 1));
        }
        let slope_in = acf[i] - acf[i - 1];
        let slope_out = acf[i + 1] - acf[i];
        if slope_in < 0.0 && slope_out > 0.0 {
            troughs.push(i);
        } else if slope_in > 0.0 && slope_out < 0.0 {
            let Some(&trough) = troughs.last() else {
                continue;
            };
            let peak = acf[i];
            if peak - acf[trough] < TH || peak < 0.0 {
                continue;
            }
            return i as f64;
        }
    }
    0.0
}

fn embed2_dist_tau_d_expfit_meandiff(y: &[f64], acf: &Acf) -> f64 {
    let size = y.len();
    let mut tau = acf.first_zero(size);
    if tau as f64 > size as f64 / 10.0 {
        tau = size / 10;
    }
    if size < tau + 2 {
        return f64::NAN;
    }
    let n = size - tau - 1;
    let d: Vec<f64> = (0..n)
        .map(|i| {
            let a = y[i + 1] - y[i];
            let b = y[i + tau] - y[i + tau + 1];
            (a * a + b * b).sqrt()
        })
        .collect();
    let l = mean(&d);
    let sd = stddev(&d);
    if sd < 0.001 {
        return 0.0;
    }
    let (lo, hi) = min_max(&d);
    let n_bins = ((hi - lo) / (3.5 * sd / (n as f64).powf(1.0 / 3.0))).ceil();
    if !(n_bins >= 1.0) {
        return if n_bins == 0.0 { 0.0 } else { f64::NAN };
    }
    let (counts, lo, step) = histcounts(&d, n_bins as usize);
    let mut total = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        let e0 = i as f64 * step + lo;
        let e1 = (i + 1) as f64 * step + lo;
        let expf = ((-(e0 + e1) * 0.5 / l).exp() / l).max(0.0);
        total += (c as f64 / n as f64 - expf).abs();
    }
    total / counts.len() as f64
}

fn pearson_lag(y: &[f64], lag: usize) -> f64 {
    let n = y.len() - lag;
    let a = &y[..n];
    let b = &y[lag..];
    let ma = mean(a);
    let mb = mean(b);
    let mut nom = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for (x, z) in a.iter().zip(b) {
        nom += (x - ma) * (z - mb);
        da += (x - ma) * (x - ma);
        db += (z - mb) * (z - mb);
    }
    nom / (da * db).sqrt()
}

fn auto_mutual_info_40_gaussian_fmmi(y: &[f64]) -> f64 {
    let tau = 40.min(y.len().div_ceil(2));
    if tau < 3 {
        return tau as f64;
    }
    let ami = |lag: usize| {
        let ac = pearson_lag(y, lag);
        -0.5 * (1.0 - ac * ac).ln()
    };
    let mut prev = ami(1);
    let mut curr = ami(2);
    for i in 1..tau - 1 {
        let next = ami(i + 2);
        if curr < prev && curr < next {
            return i as f64;
        }
        prev = curr;
        curr = next;
    }
    tau as f64
}

fn mean_residuals(y: &[f64], train_len: usize) -> Vec<f64> {
    (0..y.len() - train_len)
        .map(|i| {
            let mut est = 0.0;
            for v in &y[i..i + train_len] {
                est += v;
            }
            y[i + train_len] - est / train_len as f64
        })
        .collect()
}

fn local_simple_mean1_tauresrat(y: &[f64], acf: &Acf) -> f64 {
    if y.len() <= 1 {
        return f64::NAN;
    }
    let res = mean_residuals(y, 1);
    let res_zero = Acf::new(&res).first_zero(res.len());
    let y_zero = acf.first_zero(y.len());
    res_zero as f64 / y_zero as f64
}

fn local_simple_mean_stderr(y: &[f64], train_len: usize) -> f64 {
    if y.len() <= train_len {
        return f64::NAN;
    }
    stddev(&mean_residuals(y, train_len))
}

fn outlier_include(y: &[f64], m: f64, sign: f64) -> f64 {
    const INC: f64 = 0.01;
    let size = y.len();
    if y.iter().all(|&v| v == y[0]) {
        return 0.0;
    }
    let sd = std_with_mean(y, m);
    let work: Vec<f64> = y.iter().map(|v| sign * ((v - m) / sd)).collect();
    let tot = work.iter().filter(|&&v| v >= 0.0).count();
    let max_val = work.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max_val >= INC) {
        return 0.0;
    }
    let n_thresh = (max_val / INC + 1.0) as usize;

    // highest threshold index each position reaches, using the exact
    // `v >= j * inc` comparison
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n_thresh];
    for (i, &v) in work.iter().enumerate() {
        let q = v / INC;
        let mut j: i64 = if q >= (n_thresh - 1) as f64 {
            n_thresh as i64 - 1
        } else if q < 0.0 {
            -1
        } else {
            q as i64
        };
        while j + 1 < n_thresh as i64 && v >= (j + 1) as f64 * INC {
            j += 1;
        }
        while j >= 0 && v < j as f64 * INC {
            j -= 1;
        }
        if j >= 0 {
            buckets[j as usize].push(i);
        }
    }
    let mut counts = vec![0usize; n_thresh];
    let mut run = 0;
    for j in (0..n_thresh).rev() {
        run += buckets[j].len();
        counts[j] = run;
    }
    let mut mj = 0;
    for (j, &c) in counts.iter().enumerate() {
        if (c as f64 - 1.0) * 100.0 / tot as f64 > 2.0 {
            mj = j;
        }
    }
    let fbi = counts.iter().position(|&c| c == 1).unwrap_or(n_thresh - 1);
    let trim = mj.min(fbi);

    // sweep thresholds downward, tracking the order statistics of the
    // qualifying positions with a Fenwick tree
    let mut bit = vec![0i64; size + 1];
    let mut logn = 1usize;
    while (logn << 1) <= size {
        logn <<= 1;
    }
    let select = |bit: &[i64], mut k: i64| {
        let mut pos = 0usize;
        let mut pw = logn;
        while pw > 0 {
            if pos + pw <= size && bit[pos + pw] < k {
                pos += pw;
                k -= bit[pos];
            }
            pw >>= 1;
        }
        (pos + 1) as f64
    };
    let denom = size as f64 / 2.0;
    let mut ms = vec![0.0f64; trim + 1];
    let mut m_count = 0i64;
    for j in (0..n_thresh).rev() {
        for &i in &buckets[j] {
            let mut p = i + 1;
            while p <= size {
                bit[p] += 1;
                p += p & p.wrapping_neg();
            }
            m_count += 1;
        }
        if j > trim {
            continue;
        }
        let med = if m_count % 2 == 1 {
            select(&bit, m_count / 2 + 1)
        } else {
            (select(&bit, m_count / 2) + select(&bit, m_count / 2 + 1)) / 2.0
        };
        ms[j] = med / denom - 1.0;
    }
    median(&ms)
}

#[derive(Clone, Copy)]
enum WelchSummary {
    Area5_1,
    Centroid,
}

fn welch_rect(y: &[f64], m: f64, what: WelchSummary) -> f64 {
    // the reference uses this truncated constant
    #[allow(clippy::approx_constant)]
    const PI: f64 = 3.14159265359;
    let size = y.len();
    let nfft = size.next_power_of_two();
    let mut padded = vec![0.0; nfft];
    for (p, v) in padded.iter_mut().zip(y) {
        *p = v - m;
    }
    let spec = dft(&padded);
    let kmu = (size as f64).sqrt().powi(2);
    let n_out = nfft / 2 + 1;
    let df = 1.0 / nfft as f64;
    let mut w = Vec::with_capacity(n_out);
    let mut sw = Vec::with_capacity(n_out);
    for i in 0..n_out {
        let mut p = spec[i % nfft].norm().powi(2) / kmu;
        if i > 0 && i < n_out - 1 {
            p *= 2.0;
        }
        let s = p / (2.0 * PI);
        if s.is_infinite() {
            return 0.0;
        }
        w.push(2.0 * PI * (i as f64 * df));
        sw.push(s);
    }
    let dw = w[1] - w[0];
    match what {
        WelchSummary::Area5_1 => {
            let area: f64 = sw[..n_out / 5].iter().sum();
            area * dw
        }
        WelchSummary::Centroid => {
            let mut cs = Vec::with_capacity(n_out);
            let mut acc = 0.0;
            for (i, s) in sw.iter().enumerate() {
                acc = if i == 0 { *s } else { acc + s };
                cs.push(acc);
            }
            let half = cs[n_out - 1] * 0.5;
            cs.iter().position(|&c| c > half).map_or(0.0, |i| w[i])
        }
    }
}

fn motif_three_quantile_hh(y: &[f64], sorted: &[f64]) -> f64 {
    let size = y.len();
    let labels = coarsegrain3(y, sorted);
    let mut hh = 0.0;
    for a in 1..=3u8 {
        let mut r1: Vec<usize> = (0..size).filter(|&j| labels[j] == a).collect();
        if r1.last() == Some(&(size - 1)) {
            r1.pop();
        }
        for b in 1..=3u8 {
            let count = r1.iter().filter(|&&j| labels[j + 1] == b).count();
            let p = count as f64 / (size as f64 - 1.0);
            if p > 0.0 {
                hh -= p * p.ln();
            }
        }
    }
    hh
}

#[derive(Clone, Copy, PartialEq)]
enum Fluct {
    RsRange,
    Dfa,
}

fn linreg(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mut sx = 0.0;
    let mut sx2 = 0.0;
    let mut sxy = 0.0;
    let mut sy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sx += a;
        sx2 += a * a;
        sxy += a * b;
        sy += b;
    }
    let denom = n * sx2 - sx * sx;
    if denom == 0.0 {
        return (0.0, 0.0);
    }
    ((n * sxy - sx * sy) / denom, (sy * sx2 - sx * sxy) / denom)
}

fn fluct_anal(y: &[f64], lag: usize, how: Fluct) -> f64 {
    const STEPS: usize = 50;
    let size = y.len();
    let lin_low = 5f64.ln();
    let lin_high = ((size / 2) as f64).ln();
    let tau_step = (lin_high - lin_low) / (STEPS - 1) as f64;
    let mut tau = [0i64; STEPS];
    for (i, t) in tau.iter_mut().enumerate() {
        *t = (lin_low + i as f64 * tau_step).exp().round() as i64;
    }
    let mut n_tau = STEPS;
    for i in 0..STEPS - 1 {
        while tau[i] == tau[i + 1] && i + 1 < n_tau {
            for j in i + 1..STEPS - 1 {
                tau[j] = tau[j + 1];
            }
            n_tau -= 1;
        }
    }
    if n_tau < 12 {
        return 0.0;
    }

    let size_cs = size / lag;
    let mut cs = vec![0.0f64; size_cs];
    cs[0] = y[0];
    for i in 0..size_cs - 1 {
        cs[i + 1] = cs[i] + y[(i + 1) * lag];
    }

    let mut log_tt = Vec::with_capacity(n_tau);
    let mut log_ff = Vec::with_capacity(n_tau);
    for &t in &tau[..n_tau] {
        let t = t as usize;
        let n_buffer = size_cs / t;
        let mut sx = 0.0;
        let mut sx2 = 0.0;
        for k in 0..t {
            let xv = (k + 1) as f64;
            sx += xv;
            sx2 += xv * xv;
        }
        let denom = t as f64 * sx2 - sx * sx;
        let mut fi = 0.0;
        for j in 0..n_buffer {
            let w = &cs[j * t..(j + 1) * t];
            let mut sxy = 0.0;
            let mut sy = 0.0;
            for (k, v) in w.iter().enumerate() {
                sxy += (k + 1) as f64 * v;
                sy += v;
            }
            let (m, b) = if denom == 0.0 {
                (0.0, 0.0)
            } else {
                ((t as f64 * sxy - sx * sy) / denom, (sy * sx2 - sx * sxy) / denom)
            };
            let resid = |k: usize| w[k] - (m * (k + 1) as f64 + b);
            match how {
                Fluct::Dfa => {
                    for k in 0..t {
                        let r = resid(k);
                        fi += r * r;
                    }
                }
                Fluct::RsRange => {
                    let mut hi = resid(0);
                    let mut lo = hi;
                    for k in 1..t {
                        let r = resid(k);
                        if r > hi {
                            hi = r;
                        }
                        if r < lo {
                            lo = r;
                        }
                    }
                    fi += (hi - lo) * (hi - lo);
                }
            }
        }
        let f = match how {
            Fluct::Dfa => (fi / (n_buffer * t) as f64).sqrt(),
            Fluct::RsRange => (fi / n_buffer as f64).sqrt(),
        };
        log_tt.push((t as f64).ln());
        log_ff.push(f.ln());
    }

    const MIN_POINTS: usize = 6;
    let ntt = n_tau;
    let mut sserr = Vec::with_capacity(ntt - 2 * MIN_POINTS + 1);
    for i in MIN_POINTS..ntt - MIN_POINTS + 1 {
        let (m1, b1) = linreg(&log_tt[..i], &log_ff[..i]);
        let (m2, b2) = linreg(&log_tt[i - 1..], &log_ff[i - 1..]);
        let norm = |m: f64, b: f64, xs: &[f64], ys: &[f64]| {
            xs.iter()
                .zip(ys)
                .map(|(x, y)| {
                    let r = x * m + b - y;
                    r * r
                })
                .sum::<f64>()
                .sqrt()
        };
        sserr.push(norm(m1, b1, &log_tt[..i], &log_ff[..i]) + norm(m2, b2, &log_tt[i - 1..], &log_ff[i - 1..]));
    }
    let mut minimum = sserr[0];
    for &v in &sserr[1..] {
        if v < minimum {
            minimum = v;
        }
    }
    let first_min = sserr
        .iter()
        .position(|&v| v == minimum)
        .map_or(0.0, |i| (i + MIN_POINTS - 1) as f64);
    (first_min + 1.0) / ntt as f64
}
