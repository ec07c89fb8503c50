//! Causal discovery rate curves: outcome proportions of a discovery method
//! across repeated subsamples of increasing size.

mod ci;
mod clt;
mod estimate;

pub use ci::{pointwise_ci, z_two_sided, PointwiseCi};
pub use clt::{clt_condition, CltConditionReport};
pub use estimate::{
    default_grid, estimate_cddr, CddrConfig, CddrCurve, Method, OutcomeRates, DEFAULT_ALPHA,
    DEFAULT_GRID, DEFAULT_MAX_REDRAWS, DEFAULT_SUBSAMPLES,
};
