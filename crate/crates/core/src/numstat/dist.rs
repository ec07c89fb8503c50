use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::rng::RngStream;
use crate::error::{invalid, Result};

/// Gaussian mixture with `k` components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmSpec {
    weights: Vec<f64>,
    means: Vec<f64>,
    sds: Vec<f64>,
}

impl GmmSpec {
    pub fn new(weights: Vec<f64>, means: Vec<f64>, sds: Vec<f64>) -> Result<Self> {
        let k = weights.len();
        if k == 0 || means.len() != k || sds.len() != k {
            return invalid(format!(
                "GMM needs equal non-empty weights/means/sds, got {}/{}/{}",
                k,
                means.len(),
                sds.len()
            ));
        }
        if weights.iter().chain(&means).chain(&sds).any(|v| !v.is_finite()) {
            return invalid("GMM parameters must be finite");
        }
        if weights.iter().any(|w| *w < 0.0) {
            return invalid("GMM weights must be non-negative");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("GMM weights sum to {total}, expected 1"));
        }
        if sds.iter().any(|s| *s <= 0.0) {
            return invalid("GMM standard deviations must be positive");
        }
        Ok(Self { weights, means, sds })
    }

    pub fn gaussian(mean: f64, sd: f64) -> Result<Self> {
        Self::new(vec![1.0], vec![mean], vec![sd])
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sds(&self) -> &[f64] {
        &self.sds
    }

    pub fn mean(&self) -> f64 {
        self.weights.iter().zip(&self.means).map(|(w, m)| w * m).sum()
    }

    /// `E[(e - mean)^p]` for p in 2..=4, from the per-component Gaussian moments.
    pub fn central_moment(&self, p: u32) -> f64 {
        let mu = self.mean();
        self.weights
            .iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(w, (m, s))| {
                let d = m - mu;
                let v = s * s;
                w * match p {
                    2 => d * d + v,
                    3 => d.powi(3) + 3.0 * d * v,
                    4 => d.powi(4) + 6.0 * d * d * v + 3.0 * v * v,
                    _ => panic!("central moment order {p} not supported"),
                }
            })
            .sum()
    }

    pub fn sd(&self) -> f64 {
        self.central_moment(2).sqrt()
    }

    pub fn excess_kurtosis(&self) -> f64 {
        self.central_moment(4) / self.central_moment(2).powi(2) - 3.0
    }

    /// Same shape rescaled by `c > 0` around zero: means and sds times `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.weights.clone(),
            self.means.iter().map(|m| m * c).collect(),
            self.sds.iter().map(|s| s * c).collect(),
        )
    }

    /// Centered, unit-variance version of this mixture.
    pub fn standardized(&self) -> Result<Self> {
        let mu = self.mean();
        let sd = self.sd();
        Self::new(
            self.weights.clone(),
            self.means.iter().map(|m| (m - mu) / sd).collect(),
            self.sds.iter().map(|s| s / sd).collect(),
        )
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut comp = self.k() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                comp = i;
                break;
            }
        }
        let z: f64 = rng.sample(StandardNormal);
        self.means[comp] + self.sds[comp] * z
    }
}

/// Exponential(rate) conditioned on the value not exceeding `upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedExponential {
    pub rate: f64,
    pub upper: f64,
}

impl Default for TruncatedExponential {
    fn default() -> Self {
        Self {
            rate: 1.0,
            upper: 3.0,
        }
    }
}

impl TruncatedExponential {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate.is_finite() && self.rate > 0.0 && self.upper.is_finite() && self.upper > 0.0) {
            return invalid(format!(
                "truncated exponential needs positive finite rate and upper, got {} and {}",
                self.rate, self.upper
            ));
        }
        Ok(())
    }

    /// `1/rate - upper e^{-rate upper} / (1 - e^{-rate upper})`
    pub fn mean(&self) -> f64 {
        let tail = (-self.rate * self.upper).exp();
        1.0 / self.rate - self.upper * tail / (1.0 - tail)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= self.upper {
            1.0
        } else {
            (-self.rate * x).exp_m1() / (-self.rate * self.upper).exp_m1()
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        let mass = -(-self.rate * self.upper).exp_m1();
        (-(-u * mass).ln_1p() / self.rate).min(self.upper)
    }
}

pub fn sample_truncated_exponential(
    n: usize,
    dist: TruncatedExponential,
    stream: &RngStream,
) -> Result<Vec<f64>> {
    if n == 0 {
        return invalid("sample size must be at least 1");
    }
    dist.validate()?;
    let mut rng = stream.rng();
    Ok((0..n).map(|_| dist.quantile(rng.random::<f64>())).collect())
}

pub fn sample_gmm(n: usize, spec: &GmmSpec, stream: &RngStream) -> Result<Vec<f64>> {
    if n == 0 {
        return invalid("sample size must be at least 1");
    }
    let mut rng = stream.rng();
    Ok((0..n).map(|_| spec.draw(&mut rng)).collect())
}

pub fn sample_standard_normal(n: usize, stream: &RngStream) -> Result<Vec<f64>> {
    sample_gmm(n, &GmmSpec::gaussian(0.0, 1.0)?, stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numstat::mean;

    fn trimodal() -> GmmSpec {
        GmmSpec::new(vec![0.3, 0.4, 0.3], vec![-3.0, 0.0, 3.0], vec![0.5, 1.0, 0.5]).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(GmmSpec::new(vec![0.5, 0.6], vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(GmmSpec::new(vec![0.5, 0.5], vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
        assert!(GmmSpec::new(vec![1.0], vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(GmmSpec::new(vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn truncated_exponential_support_and_determinism() {
        let s = RngStream::new(3).child("x", 0);
        let d = TruncatedExponential::default();
        let a = sample_truncated_exponential(5000, d, &s).unwrap();
        assert!(a.iter().all(|v| (0.0..=3.0).contains(v)));
        assert_eq!(a, sample_truncated_exponential(5000, d, &s).unwrap());
    }

    #[test]
    fn truncated_exponential_mean() {
        let d = TruncatedExponential::default();
        // closed form 1 - 3e^-3/(1-e^-3)
        let e3 = (-3.0f64).exp();
        let analytic = 1.0 - 3.0 * e3 / (1.0 - e3);
        assert!((d.mean() - analytic).abs() < 1e-15);
        assert!((analytic - 0.8428).abs() < 1e-4);
        // independent check of the closed form: midpoint rule on x f(x)
        let steps = 200_000;
        let h = 3.0 / steps as f64;
        let norm = 1.0 - e3;
        let quad: f64 = (0..steps)
            .map(|i| {
                let x = (i as f64 + 0.5) * h;
                x * (-x).exp() / norm * h
            })
            .sum();
        assert!((quad - analytic).abs() < 1e-8);
        let draws = sample_truncated_exponential(100_000, d, &RngStream::new(1)).unwrap();
        assert!((mean(&draws) - analytic).abs() < 0.02);
    }

    #[test]
    fn gmm_moments() {
        let z = sample_gmm(100_000, &GmmSpec::gaussian(0.0, 1.0).unwrap(), &RngStream::new(5)).unwrap();
        assert!(mean(&z).abs() < 0.02);
        let spec = trimodal();
        assert_eq!(spec.mean(), 0.0);
        let e = sample_gmm(100_000, &spec, &RngStream::new(6)).unwrap();
        assert!(mean(&e).abs() < 0.03);
        assert_eq!(e, sample_gmm(100_000, &spec, &RngStream::new(6)).unwrap());
    }

    #[test]
    fn standardized_has_unit_sd() {
        let s = trimodal().standardized().unwrap();
        assert!(s.mean().abs() < 1e-15);
        assert!((s.sd() - 1.0).abs() < 1e-12);
        assert!((s.excess_kurtosis() - trimodal().excess_kurtosis()).abs() < 1e-12);
    }
}
