use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Ordered finite observations of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Sample(Vec<f64>);

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("value at index {i} is not finite"));
        }
        Ok(Self(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Sample {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = crate::Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Sample> for Vec<f64> {
    fn from(s: Sample) -> Self {
        s.0
    }
}

/// Paired observations of `x` and `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariateSample {
    x: Sample,
    y: Sample,
}

impl BivariateSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return invalid(format!("x has {} values but y has {}", x.len(), y.len()));
        }
        Ok(Self {
            x: Sample::new(x)?,
            y: Sample::new(y)?,
        })
    }

    pub fn x(&self) -> &Sample {
        &self.x
    }

    pub fn y(&self) -> &Sample {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Roles of the two variables exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }

    /// Rows at `indices`, repeats allowed.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            x: Sample(indices.iter().map(|&i| self.x[i]).collect()),
            y: Sample(indices.iter().map(|&i| self.y[i]).collect()),
        }
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.x.0, self.y.0)
    }
}

/// Hypothesized causal direction between the two variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "x_to_y")]
    XtoY,
    #[serde(rename = "y_to_x")]
    YtoX,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::XtoY => "x_to_y",
            Direction::YtoX => "y_to_x",
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Direction::XtoY => Direction::YtoX,
            Direction::YtoX => Direction::XtoY,
        }
    }

    /// `(predictor, response)` under this direction.
    pub fn roles(self, data: &BivariateSample) -> (&[f64], &[f64]) {
        match self {
            Direction::XtoY => (data.x(), data.y()),
            Direction::YtoX => (data.y(), data.x()),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "x_to_y" => Ok(Direction::XtoY),
            "y_to_x" => Ok(Direction::YtoX),
            other => invalid(format!("unknown direction {other:?}, expected x_to_y or y_to_x")),
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}
