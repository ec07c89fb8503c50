//! Descriptive statistics shared by the simulation checks and the replication harness.

use super::ols::mean;

/// Sample standard deviation with the `n - 1` divisor.
pub fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    // shifted by the first value so constant input gives exactly zero
    let d: Vec<f64> = v.iter().map(|x| x - v[0]).collect();
    let m = mean(&d);
    (d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn central(v: &[f64], p: i32) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(p)).sum::<f64>() / v.len() as f64
}

pub fn skewness(v: &[f64]) -> f64 {
    central(v, 3) / central(v, 2).powf(1.5)
}

pub fn excess_kurtosis(v: &[f64]) -> f64 {
    central(v, 4) / central(v, 2).powi(2) - 3.0
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Quantile by linear interpolation between order statistics
/// (`h = (n - 1) q`, the default of R and NumPy).
pub fn quantile(v: &[f64], q: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let h = (s.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `v` and Uniform(0, 1).
pub fn ks_distance_uniform(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - x).max(x - i as f64 / n)
        })
        .fold(0.0, f64::max)
}
