use serde::{Deserialize, Serialize};

/// Sufficient conditions for asymptotic normality of a rate estimate at one
/// subsample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltConditionReport {
    pub n_total: usize,
    pub num_subsamples: usize,
    pub subsample_size: usize,
    /// `N > S n`.
    pub pool_condition_holds: bool,
    pub expression_defined: bool,
    /// `S n log(1 - (nS)(nS - S) / (N (N - nS)^(n-1)))` when defined.
    pub expression_value: Option<f64>,
}

/// Evaluate the overlap conditions, in log space because `(N - nS)^(n-1)`
/// overflows for realistic sizes.
pub fn clt_condition(n_total: usize, num_subsamples: usize, subsample_size: usize) -> CltConditionReport {
    let (big_n, s, n) = (n_total as f64, num_subsamples as f64, subsample_size as f64);
    let pool = n * s;
    let pool_condition_holds = big_n > pool;
    let expression_value = if !pool_condition_holds || n_total == 0 || num_subsamples == 0 || subsample_size == 0 {
        None
    } else if subsample_size == 1 {
        // nS - S = 0: the log argument is exactly 1
        Some(0.0)
    } else {
        let ln_ratio = pool.ln() + (pool - s).ln() - big_n.ln() - (n - 1.0) * (big_n - pool).ln();
        if ln_ratio >= 0.0 {
            None
        } else {
            Some(s * n * (-ln_ratio.exp()).ln_1p())
        }
    };
    CltConditionReport {
        n_total,
        num_subsamples,
        subsample_size,
        pool_condition_holds,
        expression_defined: expression_value.is_some(),
        expression_value,
    }
}
