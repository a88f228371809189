//! Basic summary statistics of an interval.

pub fn mean(y: &[f64]) -> f64 {
    y.iter().sum::<f64>() / y.len() as f64
}

/// Sample standard deviation (denominator `n - 1`); 0 below two values.
pub fn std(y: &[f64]) -> f64 {
    std_with_mean(y, mean(y))
}

pub(crate) fn std_with_mean(y: &[f64], m: f64) -> f64 {
    if y.len() < 2 {
        return 0.0;
    }
    let ss: f64 = y.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (y.len() - 1) as f64).sqrt()
}

/// Least-squares slope of the values against their 0-based index.
pub fn slope(y: &[f64]) -> f64 {
    let n = y.len();
    if n < 2 {
        return 0.0;
    }
    let x_mean = (n - 1) as f64 / 2.0;
    let y_mean = mean(y);
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, v) in y.iter().enumerate() {
        let dx = i as f64 - x_mean;
        num += dx * (v - y_mean);
        den += dx * dx;
    }
    num / den
}

/// Linear-interpolation quantile at position `(n - 1) * q` of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

pub fn quantile(y: &[f64], q: f64) -> f64 {
    let mut s = y.to_vec();
    s.sort_by(f64::total_cmp);
    quantile_sorted(&s, q)
}

pub fn median(y: &[f64]) -> f64 {
    quantile(y, 0.5)
}

pub fn iqr(y: &[f64]) -> f64 {
    let mut s = y.to_vec();
    s.sort_by(f64::total_cmp);
    quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25)
}
