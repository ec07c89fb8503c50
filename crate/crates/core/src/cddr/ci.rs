use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointwiseCi {
    pub se: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Two-sided standard-normal critical value `z` with `P(|Z| > z) = alpha`.
pub fn z_two_sided(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(1.0 - alpha / 2.0))
}

/// Normal-approximation interval for a proportion estimated from `S`
/// independent draws, clamped to `[0, 1]`.
pub fn pointwise_ci(p_hat: f64, num_subsamples: usize, alpha: f64) -> Result<PointwiseCi> {
    if !(0.0..=1.0).contains(&p_hat) {
        return invalid(format!("rate must lie in [0, 1], got {p_hat}"));
    }
    if num_subsamples < 2 {
        return invalid(format!("need at least 2 subsamples, got {num_subsamples}"));
    }
    let z = z_two_sided(alpha)?;
    let se = (p_hat * (1.0 - p_hat) / num_subsamples as f64).sqrt();
    Ok(PointwiseCi {
        se,
        lower: (p_hat - z * se).clamp(0.0, 1.0),
        upper: (p_hat + z * se).clamp(0.0, 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_value() {
        assert!((z_two_sided(0.05).unwrap() - 1.959963984540054).abs() < 1e-9);
        assert!(z_two_sided(0.0).is_err());
    }

    #[test]
    fn half_rate() {
        let ci = pointwise_ci(0.5, 100, 0.05).unwrap();
        assert!((ci.se - 0.05).abs() < 1e-15);
        // 0.5 -/+ 1.959964 * 0.05
        assert!((ci.lower - 0.4020018).abs() < 1e-6);
        assert!((ci.upper - 0.5979982).abs() < 1e-6);
    }

    #[test]
    fn degenerate_rates() {
        let zero = pointwise_ci(0.0, 100, 0.05).unwrap();
        assert_eq!((zero.se, zero.lower, zero.upper), (0.0, 0.0, 0.0));
        let one = pointwise_ci(1.0, 400, 0.05).unwrap();
        assert_eq!((one.se, one.lower, one.upper), (0.0, 1.0, 1.0));
    }

    #[test]
    fn clamped_to_unit_interval() {
        let ci = pointwise_ci(0.02, 10, 0.05).unwrap();
        assert_eq!(ci.lower, 0.0);
        assert!(ci.upper > 0.02);
        assert!(pointwise_ci(0.5, 1, 0.05).is_err());
        assert!(pointwise_ci(1.5, 10, 0.05).is_err());
    }
}
