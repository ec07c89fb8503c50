//! Numerical primitives: kernels and HSIC, centered OLS, sampling
//! distributions, and hierarchical random streams.

mod describe;
mod dist;
mod kernel;
mod ols;
mod rng;

pub use describe::{correlation, excess_kurtosis, ks_distance_uniform, quantile, sample_sd, skewness};
pub use dist::{
    sample_gmm, sample_standard_normal, sample_truncated_exponential, GmmSpec, TruncatedExponential,
};
pub use kernel::{exp_nonpositive, hsic_biased, hsic_brute, median_heuristic_bandwidth, GaussianGram, BRUTE_MAX_N};
pub use ols::{centered, mean, ols_fit, variance, OlsFit, DEGENERATE_VARIANCE};
pub use rng::RngStream;
