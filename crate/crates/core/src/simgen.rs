//! Generators for the six simulation settings. Every dataset has ground
//! truth `X -> Y`.
//!
//! Linearity settings draw `X` from a truncated exponential and set
//! `Y = sign(X - a) |X - a|^p * beta + e`. Gaussianity settings draw
//! `X ~ N(0, 1)` and set `Y = beta X + e` with Gaussian or mixture noise.

use serde::{Deserialize, Serialize};

use crate::discovery::{BivariateSample, Direction};
use crate::error::{invalid, Result};
use crate::numstat::{
    sample_gmm, sample_standard_normal, sample_truncated_exponential, GmmSpec, RngStream,
    TruncatedExponential,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linearity {
    Linear,
    SlightlyNonlinear,
    Nonlinear,
}

impl Linearity {
    pub fn power(self) -> f64 {
        match self {
            Linearity::Linear => 1.0,
            Linearity::SlightlyNonlinear => 1.25,
            Linearity::Nonlinear => 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gaussianity {
    Gaussian,
    SlightlyNonGaussian,
    NonGaussian,
}

/// Two-component mixture: weights (0.5, 0.5), means (-2, 2), sds (1, 1).
pub fn gmm_k2() -> GmmSpec {
    GmmSpec::new(vec![0.5, 0.5], vec![-2.0, 2.0], vec![1.0, 1.0]).expect("valid default")
}

/// Three-component mixture: weights (0.3, 0.4, 0.3), means (-3, 0, 3), sds (0.5, 1, 0.5).
pub fn gmm_k3() -> GmmSpec {
    GmmSpec::new(vec![0.3, 0.4, 0.3], vec![-3.0, 0.0, 3.0], vec![0.5, 1.0, 0.5])
        .expect("valid default")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearitySetting {
    pub linearity: Linearity,
    /// `a` in `sign(X - a)|X - a|^p`.
    pub shift: f64,
    pub beta: f64,
    /// Noise shape; rescaled to unit variance before use.
    pub noise: GmmSpec,
    /// `sd(e) / sd(signal)`.
    pub noise_ratio: f64,
    pub x_dist: TruncatedExponential,
}

impl LinearitySetting {
    pub fn new(linearity: Linearity) -> Self {
        let x_dist = TruncatedExponential::default();
        Self {
            linearity,
            shift: x_dist.mean(),
            beta: 1.0,
            noise: gmm_k3(),
            noise_ratio: 0.5,
            x_dist,
        }
    }

    fn signal(&self, x: f64) -> f64 {
        let d = x - self.shift;
        d.signum() * d.abs().powf(self.linearity.power()) * self.beta
    }

    /// Standard deviation of the signal term under the truncated exponential,
    /// by composite Simpson quadrature split at the shift.
    pub fn signal_sd(&self) -> f64 {
        let d = self.x_dist;
        let density = |x: f64| d.rate * (-d.rate * x).exp() / -(-d.rate * d.upper).exp_m1();
        let mut knots = vec![0.0, d.upper];
        if self.shift > 0.0 && self.shift < d.upper {
            knots.insert(1, self.shift);
        }
        let simpson = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| {
            let m = 20_000;
            let h = (b - a) / m as f64;
            let mut s = f(a) + f(b);
            for i in 1..m {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * f(a + i as f64 * h);
            }
            s * h / 3.0
        };
        let (mut m1, mut m2) = (0.0, 0.0);
        for w in knots.windows(2) {
            m1 += simpson(&|x| self.signal(x) * density(x), w[0], w[1]);
            m2 += simpson(&|x| self.signal(x).powi(2) * density(x), w[0], w[1]);
        }
        (m2 - m1 * m1).max(0.0).sqrt()
    }

    /// The noise distribution actually drawn from.
    pub fn effective_noise(&self) -> Result<Option<GmmSpec>> {
        let sd = self.noise_ratio * self.signal_sd();
        if sd == 0.0 {
            return Ok(None);
        }
        Ok(Some(self.noise.standardized()?.scaled(sd)?))
    }

    pub fn validate(&self) -> Result<()> {
        self.x_dist.validate()?;
        if !(self.shift.is_finite() && self.beta.is_finite()) {
            return invalid("shift and beta must be finite");
        }
        if !(self.noise_ratio.is_finite() && self.noise_ratio >= 0.0) {
            return invalid(format!("noise ratio must be >= 0, got {}", self.noise_ratio));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianitySetting {
    pub gaussianity: Gaussianity,
    pub noise: GmmSpec,
    pub beta: f64,
}

impl GaussianitySetting {
    pub fn new(gaussianity: Gaussianity) -> Self {
        let noise = match gaussianity {
            Gaussianity::Gaussian => GmmSpec::gaussian(0.0, 1.0).expect("valid default"),
            Gaussianity::SlightlyNonGaussian => gmm_k2(),
            Gaussianity::NonGaussian => gmm_k3(),
        };
        Self {
            gaussianity,
            noise,
            beta: 1.0,
        }
    }
}

/// A generated dataset with its noise draws and known direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedData {
    pub data: BivariateSample,
    pub noise: Vec<f64>,
    pub ground_truth: Direction,
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return invalid(format!("simulated datasets need n >= 3, got {n}"));
    }
    Ok(())
}

pub fn gen_linearity(setting: &LinearitySetting, n: usize, stream: &RngStream) -> Result<SimulatedData> {
    check_n(n)?;
    setting.validate()?;
    let x = sample_truncated_exponential(n, setting.x_dist, &stream.child("x", 0))?;
    let noise = match setting.effective_noise()? {
        Some(spec) => sample_gmm(n, &spec, &stream.child("noise", 0))?,
        None => vec![0.0; n],
    };
    let y = x
        .iter()
        .zip(&noise)
        .map(|(&x, &e)| setting.signal(x) + e)
        .collect();
    Ok(SimulatedData {
        data: BivariateSample::new(x, y)?,
        noise,
        ground_truth: Direction::XtoY,
    })
}

pub fn gen_gaussianity(
    setting: &GaussianitySetting,
    n: usize,
    stream: &RngStream,
) -> Result<SimulatedData> {
    check_n(n)?;
    if !setting.beta.is_finite() {
        return invalid("beta must be finite");
    }
    let x = sample_standard_normal(n, &stream.child("x", 0))?;
    let noise = sample_gmm(n, &setting.noise, &stream.child("noise", 0))?;
    let y = x
        .iter()
        .zip(&noise)
        .map(|(&x, &e)| setting.beta * x + e)
        .collect();
    Ok(SimulatedData {
        data: BivariateSample::new(x, y)?,
        noise,
        ground_truth: Direction::XtoY,
    })
}

/// One of the named simulation settings, possibly with overridden parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SimSetting {
    Linearity(LinearitySetting),
    Gaussianity(GaussianitySetting),
}

impl SimSetting {
    pub const NAMES: [&'static str; 6] = [
        "linear",
        "slightly_nonlinear",
        "nonlinear_p3",
        "gaussian",
        "slightly_non_gaussian",
        "non_gaussian",
    ];

    pub fn named(name: &str) -> Result<Self> {
        Ok(match name {
            "linear" => SimSetting::Linearity(LinearitySetting::new(Linearity::Linear)),
            "slightly_nonlinear" => {
                SimSetting::Linearity(LinearitySetting::new(Linearity::SlightlyNonlinear))
            }
            "nonlinear_p3" => SimSetting::Linearity(LinearitySetting::new(Linearity::Nonlinear)),
            "gaussian" => SimSetting::Gaussianity(GaussianitySetting::new(Gaussianity::Gaussian)),
            "slightly_non_gaussian" => {
                SimSetting::Gaussianity(GaussianitySetting::new(Gaussianity::SlightlyNonGaussian))
            }
            "non_gaussian" => {
                SimSetting::Gaussianity(GaussianitySetting::new(Gaussianity::NonGaussian))
            }
            other => {
                return invalid(format!(
                    "unknown setting {other:?}; valid settings: {}",
                    Self::NAMES.join(", ")
                ))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SimSetting::Linearity(s) => match s.linearity {
                Linearity::Linear => "linear",
                Linearity::SlightlyNonlinear => "slightly_nonlinear",
                Linearity::Nonlinear => "nonlinear_p3",
            },
            SimSetting::Gaussianity(s) => match s.gaussianity {
                Gaussianity::Gaussian => "gaussian",
                Gaussianity::SlightlyNonGaussian => "slightly_non_gaussian",
                Gaussianity::NonGaussian => "non_gaussian",
            },
        }
    }

    pub fn generate(&self, n: usize, stream: &RngStream) -> Result<SimulatedData> {
        match self {
            SimSetting::Linearity(s) => gen_linearity(s, n, stream),
            SimSetting::Gaussianity(s) => gen_gaussianity(s, n, stream),
        }
    }
}
