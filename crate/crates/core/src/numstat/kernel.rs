//! Gaussian-kernel Gram matrices and the biased HSIC estimator.
//!
//! The fast path never materializes the centering matrix. For Gram matrices
//! `K`, `L` with row sums `k`, `l` and totals `K..`, `L..`:
//!
//! ```text
//! trace(KHLH) = sum_ij K_ij L_ij - (2/n) sum_i k_i l_i + (1/n^2) K.. L..
//! ```
//!
//! so one pass over the upper triangle of both matrices is enough.

use crate::error::{invalid, Result};

/// Largest sample size accepted by [`hsic_brute`].
pub const BRUTE_MAX_N: usize = 64;

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return invalid(format!("{what}[{i}] is not finite"));
    }
    Ok(())
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return invalid(format!("length mismatch: {} vs {}", x.len(), y.len()));
    }
    if x.len() < 2 {
        return invalid(format!("need at least 2 observations, got {}", x.len()));
    }
    check_finite(x, "x")?;
    check_finite(y, "y")
}

/// Number of pairs `i < j` whose sorted difference is at most `t`.
fn count_pairs_within(sorted: &[f64], t: f64) -> u64 {
    let mut count = 0u64;
    let mut lo = 0usize;
    for (j, &vj) in sorted.iter().enumerate() {
        while vj - sorted[lo] > t {
            lo += 1;
        }
        count += (j - lo) as u64;
    }
    count
}

/// Lower median of all pairwise absolute differences, with the degenerate fallbacks.
///
/// Runs in `O(n log n)`: sort once, then bisect over the bit patterns of
/// non-negative doubles with a two-pointer pair count. Float subtraction is
/// monotone, so the count is a step function that jumps exactly at the
/// computed differences and the bisection lands on one of them.
pub fn median_heuristic_bandwidth(v: &[f64]) -> Result<f64> {
    if v.len() < 2 {
        return invalid(format!("bandwidth needs at least 2 values, got {}", v.len()));
    }
    check_finite(v, "v")?;
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(bandwidth_of_sorted(&sorted))
}

/// Largest input for which the pairwise differences are enumerated outright.
const ENUMERATE_MAX_N: usize = 400;

fn bandwidth_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len() as u64;
    let pairs = n * (n - 1) / 2;
    let k = pairs.div_ceil(2);
    let span = sorted[sorted.len() - 1] - sorted[0];
    if span == 0.0 {
        return 1.0;
    }
    let median = if sorted.len() <= ENUMERATE_MAX_N {
        kth_difference_enumerated(sorted, k)
    } else {
        kth_difference_bisected(sorted, k, span)
    };
    if median > 0.0 {
        return median;
    }
    sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min)
}

/// `k`-th smallest (1-based) of `sorted[j] - sorted[i]` over `i < j`.
fn kth_difference_enumerated(sorted: &[f64], k: u64) -> f64 {
    let mut diffs = Vec::with_capacity(sorted.len() * (sorted.len() - 1) / 2);
    for (j, &vj) in sorted.iter().enumerate() {
        diffs.extend(sorted[..j].iter().map(|&vi| vj - vi));
    }
    *diffs.select_nth_unstable_by((k - 1) as usize, f64::total_cmp).1
}

fn kth_difference_bisected(sorted: &[f64], k: u64, span: f64) -> f64 {
    // smallest bit pattern whose pair count reaches k
    let (mut lo, mut hi) = (0u64, span.to_bits());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if count_pairs_within(sorted, f64::from_bits(mid)) >= k {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    f64::from_bits(lo)
}

const LANES: usize = 8;

/// `e^x` for `x <= 0`, written branch-free so the Gram loops vectorize.
///
/// Cody-Waite reduction `x = k ln2 + r` with `|r| <= ln2/2`, then a degree-12
/// Taylor polynomial (truncation below 2e-16 relative). Arguments below -708
/// are clamped, which returns about 3e-308 instead of an underflowed zero.
#[inline(always)]
pub fn exp_nonpositive(x: f64) -> f64 {
    const SHIFT: f64 = 6755399441055744.0; // 1.5 * 2^52
    const LN2_HI: f64 = 6.931_471_803_691_238_164_90e-1;
    const LN2_LO: f64 = 1.908_214_929_270_587_700_02e-10;
    let x = x.max(-708.0);
    let t = x * std::f64::consts::LOG2_E + SHIFT;
    let k = t - SHIFT;
    let r = (x - k * LN2_HI) - k * LN2_LO;
    let mut p = 1.0 / 479_001_600.0;
    p = p * r + 1.0 / 39_916_800.0;
    p = p * r + 1.0 / 3_628_800.0;
    p = p * r + 1.0 / 362_880.0;
    p = p * r + 1.0 / 40_320.0;
    p = p * r + 1.0 / 5_040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    let ki = (t.to_bits() as i64).wrapping_sub(SHIFT.to_bits() as i64);
    p * f64::from_bits(((ki + 1023) as u64) << 52)
}

#[inline(always)]
fn kernel(a: f64, b: f64, gamma: f64) -> f64 {
    let d = a - b;
    exp_nonpositive(-(d * d) * gamma)
}

/// Writes `k(yi, ys[j])` into `out[j]`.
#[inline(always)]
fn kernel_row_into(yi: f64, ys: &[f64], gamma: f64, out: &mut [f64]) {
    for (o, &yj) in out.iter_mut().zip(ys) {
        *o = kernel(yi, yj, gamma);
    }
}

/// Returns `(sum_j w_j l_j, sum_j l_j)` and adds each `l_j` into `col_sums[j]`.
#[inline(always)]
fn reduce_row(l: &[f64], weights: &[f64], col_sums: &mut [f64]) -> (f64, f64) {
    let mut cross = [0.0; LANES];
    let mut acc = [0.0; LANES];
    let body = l.len() - l.len() % LANES;
    for ((ll, ww), cc) in l[..body]
        .chunks_exact(LANES)
        .zip(weights[..body].chunks_exact(LANES))
        .zip(col_sums[..body].chunks_exact_mut(LANES))
    {
        for t in 0..LANES {
            cross[t] += ww[t] * ll[t];
            acc[t] += ll[t];
            cc[t] += ll[t];
        }
    }
    let mut cross_sum = cross.iter().sum::<f64>();
    let mut acc_sum = acc.iter().sum::<f64>();
    for j in body..l.len() {
        cross_sum += weights[j] * l[j];
        acc_sum += l[j];
        col_sums[j] += l[j];
    }
    (cross_sum, acc_sum)
}

/// Upper-triangle pass of the fused HSIC: returns `sum_{i<j} K_ij L_ij` and
/// fills the row sums of `L` (diagonal included).
#[inline(always)]
fn fused_pass(upper: &[f64], y: &[f64], gamma: f64, row_sums: &mut [f64], scratch: &mut [f64]) -> f64 {
    let n = y.len();
    let mut cross = 0.0;
    let mut offset = 0;
    for i in 0..n {
        let len = n - i - 1;
        let k_row = &upper[offset..offset + len];
        offset += len;
        let l = &mut scratch[..len];
        kernel_row_into(y[i], &y[i + 1..], gamma, l);
        let (head, tail) = row_sums.split_at_mut(i + 1);
        let (c, acc) = reduce_row(l, k_row, tail);
        cross += c;
        head[i] += acc;
    }
    cross
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn fused_pass_avx2(
    upper: &[f64],
    y: &[f64],
    gamma: f64,
    row_sums: &mut [f64],
    scratch: &mut [f64],
) -> f64 {
    fused_pass(upper, y, gamma, row_sums, scratch)
}

fn fused_pass_dispatch(upper: &[f64], y: &[f64], gamma: f64, row_sums: &mut [f64]) -> f64 {
    let mut scratch = vec![0.0; y.len()];
    #[cfg(target_arch = "x86_64")]
    {
        if std::is_x86_feature_detected!("avx2") {
            // SAFETY: the feature was detected at runtime. Only the vector
            // width changes; without mul_add there is no contraction, so the
            // result is bit-identical to the baseline path.
            return unsafe { fused_pass_avx2(upper, y, gamma, row_sums, &mut scratch) };
        }
    }
    fused_pass(upper, y, gamma, row_sums, &mut scratch)
}

/// Gaussian Gram matrix of one variable with its median-heuristic bandwidth.
///
/// Only the strict upper triangle is stored (row-major); the diagonal is 1.
#[derive(Debug, Clone)]
pub struct GaussianGram {
    values: Vec<f64>,
    upper: Vec<f64>,
    row_sums: Vec<f64>,
    total: f64,
    bandwidth: f64,
    constant: bool,
}

impl GaussianGram {
    pub fn new(v: &[f64]) -> Result<Self> {
        let bandwidth = median_heuristic_bandwidth(v)?;
        let n = v.len();
        let constant = v.iter().all(|&x| x == v[0]);
        let gamma = 1.0 / (2.0 * bandwidth * bandwidth);
        let mut upper = Vec::with_capacity(n * (n - 1) / 2);
        let mut row_sums = vec![1.0; n];
        for i in 0..n {
            let start = upper.len();
            upper.resize(start + n - i - 1, 0.0);
            kernel_row_into(v[i], &v[i + 1..], gamma, &mut upper[start..]);
            let (head, tail) = row_sums.split_at_mut(i + 1);
            let mut acc = [0.0; LANES];
            for (j, (&k, rj)) in upper[start..].iter().zip(tail.iter_mut()).enumerate() {
                acc[j % LANES] += k;
                *rj += k;
            }
            head[i] += acc.iter().sum::<f64>();
        }
        let total = row_sums.iter().sum();
        Ok(Self {
            values: v.to_vec(),
            upper,
            row_sums,
            total,
            bandwidth,
            constant,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Biased HSIC between this variable and another Gram matrix of the same size.
    pub fn hsic(&self, other: &GaussianGram) -> Result<f64> {
        if self.len() != other.len() {
            return invalid(format!("length mismatch: {} vs {}", self.len(), other.len()));
        }
        if self.constant || other.constant {
            return Ok(0.0);
        }
        let cross: f64 = self
            .upper
            .iter()
            .zip(&other.upper)
            .map(|(a, b)| a * b)
            .sum();
        Ok(combine(
            self.len(),
            cross,
            &self.row_sums,
            &other.row_sums,
            self.total,
            other.total,
        ))
    }

    /// Biased HSIC between this variable and raw values `y`, computing the
    /// second Gram matrix on the fly without storing it.
    pub fn hsic_against(&self, y: &[f64]) -> Result<f64> {
        let n = self.len();
        if y.len() != n {
            return invalid(format!("length mismatch: {} vs {}", n, y.len()));
        }
        check_finite(y, "y")?;
        let bandwidth = median_heuristic_bandwidth(y)?;
        if self.constant || y.iter().all(|&v| v == y[0]) {
            return Ok(0.0);
        }
        let gamma = 1.0 / (2.0 * bandwidth * bandwidth);
        let mut row_sums = vec![1.0; n];
        let cross = fused_pass_dispatch(&self.upper, y, gamma, &mut row_sums);
        let total = row_sums.iter().sum();
        Ok(combine(
            n,
            cross,
            &self.row_sums,
            &row_sums,
            self.total,
            total,
        ))
    }
}

fn combine(n: usize, upper_cross: f64, rk: &[f64], rl: &[f64], tk: f64, tl: f64) -> f64 {
    let nf = n as f64;
    let full_cross = nf + 2.0 * upper_cross;
    let rows: f64 = rk.iter().zip(rl).map(|(a, b)| a * b).sum();
    let trace = full_cross - 2.0 * rows / nf + tk * tl / (nf * nf);
    trace / (nf * nf)
}

/// Biased HSIC V-statistic `trace(K H L H) / n^2` with Gaussian kernels and
/// per-variable median-heuristic bandwidths.
pub fn hsic_biased(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    GaussianGram::new(x)?.hsic(&GaussianGram::new(y)?)
}

fn brute_bandwidth(v: &[f64]) -> f64 {
    let mut diffs = Vec::new();
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            diffs.push((v[i] - v[j]).abs());
        }
    }
    diffs.sort_by(f64::total_cmp);
    let median = diffs[diffs.len().div_ceil(2) - 1];
    if median > 0.0 {
        median
    } else {
        diffs.into_iter().find(|d| *d > 0.0).unwrap_or(1.0)
    }
}

fn brute_centered_gram(v: &[f64]) -> Vec<Vec<f64>> {
    let n = v.len();
    let h = brute_bandwidth(v);
    let k: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (-(v[i] - v[j]).powi(2) / (2.0 * h * h)).exp())
                .collect()
        })
        .collect();
    let c: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 1.0 } else { 0.0 } - 1.0 / n as f64)
                .collect()
        })
        .collect();
    let matmul = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|t| a[i][t] * b[t][j]).sum()).collect())
            .collect()
    };
    matmul(&matmul(&c, &k), &c)
}

/// Reference HSIC by explicit `H K H` products and a double sum.
///
/// Shares nothing with [`hsic_biased`] beyond the formula: the bandwidth is
/// found by full enumeration and the centering matrix is built explicitly.
/// Refuses `n > 64`.
pub fn hsic_brute(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    if x.len() > BRUTE_MAX_N {
        return invalid(format!(
            "brute-force HSIC is limited to n <= {BRUTE_MAX_N}, got {}",
            x.len()
        ));
    }
    if x.iter().all(|&v| v == x[0]) || y.iter().all(|&v| v == y[0]) {
        return Ok(0.0);
    }
    let n = x.len();
    let kx = brute_centered_gram(x);
    let ly = brute_centered_gram(y);
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += kx[i][j] * ly[i][j];
        }
    }
    Ok(s / (n * n) as f64)
}
