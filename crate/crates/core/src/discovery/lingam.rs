use serde::{Deserialize, Serialize};

use super::{BivariateSample, Direction};
use crate::error::Result;
use crate::numstat::{hsic_biased, ols_fit};

/// A linear fit in one direction and the dependence left in its residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedDirection {
    pub direction: Direction,
    pub slope: f64,
    pub residuals: Vec<f64>,
    /// HSIC between the predictor and the residuals.
    pub hsic_stat: f64,
}

pub fn fit_direction(data: &BivariateSample, direction: Direction) -> Result<FittedDirection> {
    let (predictor, response) = direction.roles(data);
    let fit = ols_fit(predictor, response)?;
    let hsic_stat = hsic_biased(predictor, &fit.residuals)?;
    Ok(FittedDirection {
        direction,
        slope: fit.slope,
        residuals: fit.residuals,
        hsic_stat,
    })
}

/// Outcome of bivariate DirectLiNGAM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LingamDecision {
    pub direction: Direction,
    pub hsic_xy: f64,
    pub hsic_yx: f64,
    /// Both statistics were exactly equal; the direction defaulted to `XtoY`.
    pub tie: bool,
}

/// Pick the direction whose predictor/residual HSIC is smaller.
pub fn lingam_decide(data: &BivariateSample) -> Result<LingamDecision> {
    let hsic_xy = fit_direction(data, Direction::XtoY)?.hsic_stat;
    let hsic_yx = fit_direction(data, Direction::YtoX)?.hsic_stat;
    let direction = if hsic_yx < hsic_xy {
        Direction::YtoX
    } else {
        Direction::XtoY
    };
    Ok(LingamDecision {
        direction,
        hsic_xy,
        hsic_yx,
        tie: hsic_xy == hsic_yx,
    })
}
