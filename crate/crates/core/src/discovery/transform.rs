use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::BivariateSample;
use crate::error::{invalid, Error, Result};

/// A known transformation applied to `x` before discovery, so that the
/// methods compare `Y = b f(X) + e` against `f(X) = g Y + h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    Identity,
    Log,
    /// `f(x) = scale * exp(-rate * x)`.
    ExpDecay { scale: f64, rate: f64 },
}

impl Transform {
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        match *self {
            Transform::Identity => Ok(v.to_vec()),
            Transform::Log => {
                if let Some(i) = v.iter().position(|x| *x <= 0.0) {
                    return invalid(format!("log transform needs x > 0, x[{i}] = {}", v[i]));
                }
                Ok(v.iter().map(|x| x.ln()).collect())
            }
            Transform::ExpDecay { scale, rate } => {
                let out: Vec<f64> = v.iter().map(|x| scale * (-rate * x).exp()).collect();
                if out.iter().any(|y| !y.is_finite()) {
                    return invalid("exp_decay overflowed");
                }
                Ok(out)
            }
        }
    }
}

/// Replace `x` by `f(x)`; `y` is untouched.
pub fn apply_transform(data: &BivariateSample, transform: Transform) -> Result<BivariateSample> {
    BivariateSample::new(transform.apply(data.x())?, data.y().to_vec())
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Identity => f.write_str("identity"),
            Transform::Log => f.write_str("log"),
            Transform::ExpDecay { scale, rate } if *scale == 1.0 => write!(f, "exp_decay:b={rate}"),
            Transform::ExpDecay { scale, rate } => write!(f, "exp_decay:a={scale},b={rate}"),
        }
    }
}

impl FromStr for Transform {
    type Err = Error;

    /// `identity`, `log`, or `exp_decay:b=<rate>[,a=<scale>]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "identity" => return Ok(Transform::Identity),
            "log" => return Ok(Transform::Log),
            _ => {}
        }
        let Some(params) = s.strip_prefix("exp_decay:") else {
            return invalid(format!(
                "unknown transform {s:?}; expected identity, log or exp_decay:b=<value>"
            ));
        };
        let mut scale = 1.0;
        let mut rate = None;
        for kv in params.split(',') {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("malformed transform parameter {kv:?}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("transform parameter {kv:?} is not a number")))?;
            if !v.is_finite() {
                return invalid(format!("transform parameter {kv:?} must be finite"));
            }
            match k.trim() {
                "a" => scale = v,
                "b" => rate = Some(v),
                other => return invalid(format!("unknown exp_decay parameter {other:?}")),
            }
        }
        let Some(rate) = rate else {
            return invalid("exp_decay needs b=<rate>");
        };
        if scale == 0.0 {
            return invalid("exp_decay scale must be nonzero");
        }
        Ok(Transform::ExpDecay { scale, rate })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numstat::{ols_fit, sample_gmm, variance, GmmSpec, RngStream};

    fn r_squared(x: &[f64], y: &[f64]) -> f64 {
        let fit = ols_fit(x, y).unwrap();
        1.0 - variance(&fit.residuals) / variance(y)
    }

    #[test]
    fn identity_and_log() {
        let d = BivariateSample::new(vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]).unwrap();
        assert_eq!(apply_transform(&d, Transform::Identity).unwrap(), d);
        let e = std::f64::consts::E;
        let d = BivariateSample::new(vec![1.0, e, e * e], vec![0.0; 3]).unwrap();
        let t = apply_transform(&d, Transform::Log).unwrap();
        for (a, b) in t.x().iter().zip([0.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let bad = BivariateSample::new(vec![1.0, 0.0], vec![0.0; 2]).unwrap();
        assert!(apply_transform(&bad, Transform::Log).is_err());
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("identity".parse::<Transform>().unwrap(), Transform::Identity);
        assert_eq!(
            "exp_decay:b=0.1".parse::<Transform>().unwrap(),
            Transform::ExpDecay { scale: 1.0, rate: 0.1 }
        );
        let t: Transform = "exp_decay:a=3,b=0.25".parse().unwrap();
        assert_eq!(t.to_string().parse::<Transform>().unwrap(), t);
        assert!("exp_decay:a=3".parse::<Transform>().is_err());
        assert!("sqrt".parse::<Transform>().is_err());
        assert!("exp_decay:b=x".parse::<Transform>().is_err());
    }

    #[test]
    fn exp_decay_linearizes_dose_response() {
        let n = 400;
        let x: Vec<f64> = (0..n).map(|i| 60.0 * i as f64 / n as f64).collect();
        let noise = sample_gmm(n, &GmmSpec::gaussian(0.0, 0.05).unwrap(), &RngStream::new(3)).unwrap();
        let y: Vec<f64> = x.iter().zip(&noise).map(|(x, e)| 3.0 * (-0.1 * x).exp() + e).collect();
        let d = BivariateSample::new(x, y).unwrap();
        let before = r_squared(d.x(), d.y());
        let t = apply_transform(&d, Transform::ExpDecay { scale: 1.0, rate: 0.1 }).unwrap();
        let after = r_squared(t.x(), t.y());
        assert!(after > before + 0.1, "{before} -> {after}");
        assert!(after > 0.95);
    }
}
