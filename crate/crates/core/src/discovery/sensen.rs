//! Joint test of predictor/error independence and linearity, calibrated by
//! a residual bootstrap that imposes the null.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BivariateSample, Direction};
use crate::error::{invalid_config, Result};
use crate::numstat::{ols_fit, GaussianGram, RngStream};

pub const MIN_BOOTSTRAP_REPS: usize = 99;
pub const MIN_TEST_SIZE: usize = 10;
pub const DEFAULT_BOOTSTRAP_REPS: usize = 199;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SenSenResult {
    pub direction: Direction,
    /// `n * HSIC(predictor, residuals)`.
    pub statistic: f64,
    pub p_value: f64,
    pub bootstrap_reps: usize,
    /// Replicates whose statistic reached the observed one.
    pub exceedances: usize,
}

impl SenSenResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

/// Test `H0: predictor independent of error, relationship linear` for the
/// model implied by `direction`.
///
/// Each replicate resamples the fitted residuals with replacement, rebuilds
/// the response as `slope * predictor + resampled residuals`, refits, and
/// recomputes the statistic. The p-value uses the add-one estimator.
pub fn sensen_test(
    data: &BivariateSample,
    direction: Direction,
    bootstrap_reps: usize,
    stream: &RngStream,
) -> Result<SenSenResult> {
    if bootstrap_reps < MIN_BOOTSTRAP_REPS {
        return invalid_config(format!(
            "bootstrap replicates must be at least {MIN_BOOTSTRAP_REPS}, got {bootstrap_reps}"
        ));
    }
    let n = data.len();
    if n < MIN_TEST_SIZE {
        return invalid_config(format!(
            "the bootstrap test needs at least {MIN_TEST_SIZE} observations, got {n}"
        ));
    }
    let (predictor, response) = direction.roles(data);
    let fit = ols_fit(predictor, response)?;
    let gram = GaussianGram::new(predictor)?;
    let scale = n as f64;
    let statistic = scale * gram.hsic_against(&fit.residuals)?;

    let mut rng = stream.rng();
    let mut boot_response = vec![0.0; n];
    let mut exceedances = 0;
    for _ in 0..bootstrap_reps {
        for (yb, &p) in boot_response.iter_mut().zip(predictor) {
            *yb = fit.slope * p + fit.residuals[rng.random_range(0..n)];
        }
        let refit = ols_fit(predictor, &boot_response)?;
        if scale * gram.hsic_against(&refit.residuals)? >= statistic {
            exceedances += 1;
        }
    }
    Ok(SenSenResult {
        direction,
        statistic,
        p_value: (1 + exceedances) as f64 / (bootstrap_reps + 1) as f64,
        bootstrap_reps,
        exceedances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numstat::{sample_gmm, GmmSpec};

    fn null_data(n: usize, seed: u64) -> BivariateSample {
        let s = RngStream::new(seed);
        let spec = GmmSpec::new(vec![0.3, 0.4, 0.3], vec![-3.0, 0.0, 3.0], vec![0.5, 1.0, 0.5]).unwrap();
        let x = sample_gmm(n, &spec, &s.child("x", 0)).unwrap();
        let e = sample_gmm(n, &GmmSpec::gaussian(0.0, 1.0).unwrap(), &s.child("e", 0)).unwrap();
        let y = x.iter().zip(&e).map(|(a, b)| 0.7 * a + b).collect();
        BivariateSample::new(x, y).unwrap()
    }

    #[test]
    fn config_errors() {
        let d = null_data(50, 1);
        let s = RngStream::new(0);
        assert!(matches!(
            sensen_test(&d, Direction::XtoY, 98, &s),
            Err(crate::Error::InvalidConfig(_))
        ));
        let small = d.select(&[0, 1, 2, 3, 4, 5, 6, 7, 8]);
        assert!(matches!(
            sensen_test(&small, Direction::XtoY, 99, &s),
            Err(crate::Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn p_value_on_add_one_grid() {
        let d = null_data(60, 2);
        for seed in 0..5 {
            let r = sensen_test(&d, Direction::YtoX, 99, &RngStream::new(seed)).unwrap();
            assert!(r.p_value >= 1.0 / 100.0 && r.p_value <= 1.0);
            assert_eq!(r.p_value, (1 + r.exceedances) as f64 / 100.0);
        }
    }

    #[test]
    fn deterministic_given_stream() {
        let d = null_data(40, 3);
        let s = RngStream::new(9).child("t", 1);
        assert_eq!(
            sensen_test(&d, Direction::XtoY, 99, &s).unwrap(),
            sensen_test(&d, Direction::XtoY, 99, &s).unwrap()
        );
    }

    #[test]
    fn exact_line_never_rejects() {
        let x: Vec<f64> = (0..30).map(|i| (i as f64).sqrt()).collect();
        let y = x.iter().map(|v| 2.0 * v).collect();
        let d = BivariateSample::new(x, y).unwrap();
        let r = sensen_test(&d, Direction::XtoY, 99, &RngStream::new(1)).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn observed_statistic_is_permutation_invariant() {
        let d = null_data(80, 4);
        let perm: Vec<usize> = (0..80).map(|i| (i * 37) % 80).collect();
        let a = sensen_test(&d, Direction::XtoY, 99, &RngStream::new(1)).unwrap();
        let b = sensen_test(&d.select(&perm), Direction::XtoY, 99, &RngStream::new(1)).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-10);
    }
}
