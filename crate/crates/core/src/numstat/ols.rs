use crate::error::{degenerate, invalid, Result};

/// Variance threshold below which a variable is treated as constant.
pub const DEGENERATE_VARIANCE: f64 = 1e-12;

/// Slope and residuals of a through-the-origin fit on mean-centered data.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub slope: f64,
    pub residuals: Vec<f64>,
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn centered(v: &[f64]) -> Vec<f64> {
    let m = mean(v);
    v.iter().map(|x| x - m).collect()
}

/// Population variance (divides by `n`).
pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

/// Regress `response` on `predictor` after centering both.
pub fn ols_fit(predictor: &[f64], response: &[f64]) -> Result<OlsFit> {
    if predictor.len() != response.len() {
        return invalid(format!(
            "length mismatch: {} vs {}",
            predictor.len(),
            response.len()
        ));
    }
    if predictor.len() < 3 {
        return invalid(format!("OLS needs at least 3 observations, got {}", predictor.len()));
    }
    let xc = centered(predictor);
    let yc = centered(response);
    let sxx: f64 = xc.iter().map(|v| v * v).sum();
    if sxx / xc.len() as f64 <= DEGENERATE_VARIANCE {
        return degenerate("predictor has zero variance");
    }
    let sxy: f64 = xc.iter().zip(&yc).map(|(a, b)| a * b).sum();
    let slope = sxy / sxx;
    let residuals = yc.iter().zip(&xc).map(|(y, x)| y - slope * x).collect();
    Ok(OlsFit { slope, residuals })
}
