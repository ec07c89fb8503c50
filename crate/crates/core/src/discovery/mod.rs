//! Bivariate causal discovery: DirectLiNGAM and the test-based approach,
//! plus the residualization and transformation helpers that feed them.

mod lingam;
mod residualize;
mod sample;
mod sensen;
mod testbased;
mod transform;

pub use lingam::{fit_direction, lingam_decide, FittedDirection, LingamDecision};
pub use residualize::residualize;
pub use sample::{BivariateSample, Direction, Sample};
pub use sensen::{
    sensen_test, SenSenResult, DEFAULT_BOOTSTRAP_REPS, MIN_BOOTSTRAP_REPS, MIN_TEST_SIZE,
};
pub use testbased::{classify, sensen_both, testbased_decide, TestBasedKind, TestBasedOutcome};
pub use transform::{apply_transform, Transform};
