use serde::{Deserialize, Serialize};

use super::sensen::{sensen_test, SenSenResult};
use super::{BivariateSample, Direction};
use crate::error::{invalid_config, Result};
use crate::numstat::RngStream;

/// The four outcomes of running the bootstrap test in both directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestBasedKind {
    #[serde(rename = "favors_x_to_y")]
    FavorsXtoY,
    #[serde(rename = "favors_y_to_x")]
    FavorsYtoX,
    /// Both models misfit, most often from nonlinearity.
    RejectBoth,
    /// Neither model rejected: unidentifiable or underpowered.
    FailRejectBoth,
}

impl TestBasedKind {
    pub const ALL: [TestBasedKind; 4] = [
        TestBasedKind::FavorsXtoY,
        TestBasedKind::FavorsYtoX,
        TestBasedKind::RejectBoth,
        TestBasedKind::FailRejectBoth,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TestBasedKind::FavorsXtoY => "favors_x_to_y",
            TestBasedKind::FavorsYtoX => "favors_y_to_x",
            TestBasedKind::RejectBoth => "reject_both",
            TestBasedKind::FailRejectBoth => "fail_reject_both",
        }
    }

    pub fn favoring(direction: Direction) -> Self {
        match direction {
            Direction::XtoY => TestBasedKind::FavorsXtoY,
            Direction::YtoX => TestBasedKind::FavorsYtoX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestBasedOutcome {
    pub kind: TestBasedKind,
    /// p-value of the test whose null is `X -> Y`.
    pub p_xy: f64,
    /// p-value of the test whose null is `Y -> X`.
    pub p_yx: f64,
}

/// Map the two p-values to an outcome. Rejection is `p <= alpha`.
pub fn classify(p_xy: f64, p_yx: f64, alpha: f64) -> TestBasedKind {
    match (p_xy <= alpha, p_yx <= alpha) {
        (true, true) => TestBasedKind::RejectBoth,
        (false, false) => TestBasedKind::FailRejectBoth,
        (true, false) => TestBasedKind::FavorsYtoX,
        (false, true) => TestBasedKind::FavorsXtoY,
    }
}

/// Both directional tests, each on its own substream of `stream`.
pub fn sensen_both(
    data: &BivariateSample,
    bootstrap_reps: usize,
    stream: &RngStream,
) -> Result<(SenSenResult, SenSenResult)> {
    let (xy, yx) = rayon::join(
        || sensen_test(data, Direction::XtoY, bootstrap_reps, &stream.child("sensen", 0)),
        || sensen_test(data, Direction::YtoX, bootstrap_reps, &stream.child("sensen", 1)),
    );
    Ok((xy?, yx?))
}

pub fn testbased_decide(
    data: &BivariateSample,
    alpha: f64,
    bootstrap_reps: usize,
    stream: &RngStream,
) -> Result<TestBasedOutcome> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid_config(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let (xy, yx) = sensen_both(data, bootstrap_reps, stream)?;
    Ok(TestBasedOutcome {
        kind: classify(xy.p_value, yx.p_value, alpha),
        p_xy: xy.p_value,
        p_yx: yx.p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kind_serializes_as_label() {
        for k in TestBasedKind::ALL {
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.label()));
        }
    }

    #[test]
    fn mapping_examples() {
        assert_eq!(classify(0.50, 0.01, 0.05), TestBasedKind::FavorsXtoY);
        assert_eq!(classify(0.01, 0.50, 0.05), TestBasedKind::FavorsYtoX);
        assert_eq!(classify(0.01, 0.02, 0.05), TestBasedKind::RejectBoth);
        assert_eq!(classify(0.30, 0.60, 0.05), TestBasedKind::FailRejectBoth);
        // inclusive boundary
        assert_eq!(classify(0.05, 0.05, 0.05), TestBasedKind::RejectBoth);
    }

    #[test]
    fn labels_are_distinct_and_sorted_output_is_stable() {
        let mut labels: Vec<_> = TestBasedKind::ALL.iter().map(|k| k.label()).collect();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), 4);
    }

    #[test]
    fn bad_alpha() {
        let d = BivariateSample::new((0..20).map(f64::from).collect(), (0..20).map(|i| (i * i) as f64).collect()).unwrap();
        assert!(testbased_decide(&d, 0.0, 99, &RngStream::new(1)).is_err());
    }

    proptest! {
        #[test]
        fn mapping_is_total(p_xy in 0.0f64..=1.0, p_yx in 0.0f64..=1.0, alpha in 0.001f64..0.999) {
            let kind = classify(p_xy, p_yx, alpha);
            let expected = match (p_xy <= alpha, p_yx <= alpha) {
                (false, true) => TestBasedKind::FavorsXtoY,
                (true, false) => TestBasedKind::FavorsYtoX,
                (true, true) => TestBasedKind::RejectBoth,
                (false, false) => TestBasedKind::FailRejectBoth,
            };
            prop_assert_eq!(kind, expected);
        }
    }
}
