use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ci::pointwise_ci;
use crate::discovery::{
    lingam_decide, testbased_decide, BivariateSample, Direction, TestBasedKind,
    DEFAULT_BOOTSTRAP_REPS, MIN_BOOTSTRAP_REPS, MIN_TEST_SIZE,
};
use crate::error::{invalid_config, Error, Result};
use crate::numstat::{variance, RngStream, DEGENERATE_VARIANCE};

/// Subsample sizes used when none are given, capped at the dataset size.
pub const DEFAULT_GRID: [usize; 12] = [20, 30, 45, 67, 100, 150, 225, 337, 505, 757, 1135, 1699];
pub const DEFAULT_SUBSAMPLES: usize = 100;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_MAX_REDRAWS: usize = 10;

pub fn default_grid(n_total: usize) -> Vec<usize> {
    DEFAULT_GRID.iter().copied().filter(|&n| n <= n_total).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lingam,
    #[serde(rename = "testbased")]
    TestBased,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Lingam => "lingam",
            Method::TestBased => "testbased",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lingam" => Ok(Method::Lingam),
            "testbased" => Ok(Method::TestBased),
            other => invalid_config(format!("unknown method {other:?}, expected lingam or testbased")),
        }
    }

    /// Outcome labels in canonical (lexicographic) order.
    pub fn labels(self) -> Vec<&'static str> {
        let mut labels: Vec<&'static str> = match self {
            Method::Lingam => vec![Direction::XtoY.label(), Direction::YtoX.label()],
            Method::TestBased => TestBasedKind::ALL.iter().map(|k| k.label()).collect(),
        };
        labels.sort_unstable();
        labels
    }

    /// Label of the outcome that supports `direction`.
    pub fn label_for(self, direction: Direction) -> &'static str {
        match self {
            Method::Lingam => direction.label(),
            Method::TestBased => TestBasedKind::favoring(direction).label(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CddrConfig {
    pub method: Method,
    pub hypothesized: Direction,
    pub subsample_sizes: Vec<usize>,
    pub num_subsamples: usize,
    pub alpha: f64,
    pub bootstrap_reps: usize,
    pub master_seed: u64,
    pub max_redraws: usize,
}

impl CddrConfig {
    /// Defaults for a dataset of `n_total` observations.
    pub fn new(method: Method, n_total: usize, master_seed: u64) -> Self {
        Self {
            method,
            hypothesized: Direction::XtoY,
            subsample_sizes: default_grid(n_total),
            num_subsamples: DEFAULT_SUBSAMPLES,
            alpha: DEFAULT_ALPHA,
            bootstrap_reps: DEFAULT_BOOTSTRAP_REPS,
            master_seed,
            max_redraws: DEFAULT_MAX_REDRAWS,
        }
    }

    pub fn validate(&self, n_total: usize) -> Result<()> {
        let grid = &self.subsample_sizes;
        if grid.is_empty() {
            return invalid_config("the subsample grid is empty");
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return invalid_config(format!("subsample sizes must strictly increase: {grid:?}"));
        }
        let min = match self.method {
            Method::Lingam => 3,
            Method::TestBased => MIN_TEST_SIZE,
        };
        if grid[0] < min {
            return invalid_config(format!(
                "subsample sizes must be at least {min} for {}, got {}",
                self.method.name(),
                grid[0]
            ));
        }
        if grid[grid.len() - 1] > n_total {
            return invalid_config(format!(
                "largest subsample size {} exceeds the dataset size {n_total}",
                grid[grid.len() - 1]
            ));
        }
        if self.num_subsamples < 2 {
            return invalid_config(format!("need at least 2 subsamples, got {}", self.num_subsamples));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return invalid_config(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.method == Method::TestBased && self.bootstrap_reps < MIN_BOOTSTRAP_REPS {
            return invalid_config(format!(
                "bootstrap replicates must be at least {MIN_BOOTSTRAP_REPS}, got {}",
                self.bootstrap_reps
            ));
        }
        if self.max_redraws == 0 {
            return invalid_config("max_redraws must be positive");
        }
        Ok(())
    }
}

/// Outcome proportions at one subsample size. Maps are keyed by outcome label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRates {
    pub subsample_size: usize,
    pub counts: BTreeMap<String, usize>,
    pub rates: BTreeMap<String, f64>,
    pub se: BTreeMap<String, f64>,
    pub ci_lower: BTreeMap<String, f64>,
    pub ci_upper: BTreeMap<String, f64>,
    /// Subsamples drawn again because the first draw was degenerate.
    pub redraw_count: usize,
    /// LiNGAM decisions settled by the exact-tie convention.
    pub tie_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CddrCurve {
    pub config: CddrConfig,
    pub n_total: usize,
    pub labels: Vec<String>,
    pub hypothesized_label: String,
    pub points: Vec<OutcomeRates>,
}

impl CddrCurve {
    /// Rates of one outcome across the grid, in grid order.
    pub fn series(&self, label: &str) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p.rates.get(label).copied().unwrap_or(0.0))
            .collect()
    }

    pub fn rate(&self, subsample_size: usize, label: &str) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.subsample_size == subsample_size)
            .and_then(|p| p.rates.get(label).copied())
    }
}

struct CellOutcome {
    label: &'static str,
    redraws: usize,
    tie: bool,
}

fn run_method(sub: &BivariateSample, config: &CddrConfig, stream: &RngStream) -> Result<(&'static str, bool)> {
    match config.method {
        Method::Lingam => {
            let d = lingam_decide(sub)?;
            Ok((d.direction.label(), d.tie))
        }
        Method::TestBased => {
            let o = testbased_decide(sub, config.alpha, config.bootstrap_reps, stream)?;
            Ok((o.kind.label(), false))
        }
    }
}

fn run_cell(data: &BivariateSample, config: &CddrConfig, size: usize, draw: usize) -> Result<CellOutcome> {
    let cell = RngStream::new(config.master_seed)
        .child("cddr", size as u64)
        .child("sub", draw as u64);
    let n_total = data.len();
    let mut reason = String::new();
    for attempt in 0..=config.max_redraws {
        let stream = if attempt == 0 {
            cell.clone()
        } else {
            cell.child("redraw", attempt as u64)
        };
        let mut rng = stream.child("indices", 0).rng();
        let indices: Vec<usize> = (0..size).map(|_| rng.random_range(0..n_total)).collect();
        let sub = data.select(&indices);
        if variance(sub.x()) < DEGENERATE_VARIANCE || variance(sub.y()) < DEGENERATE_VARIANCE {
            reason = "constant variable in subsample".into();
            continue;
        }
        match run_method(&sub, config, &stream.child("method", 0)) {
            Ok((label, tie)) => {
                return Ok(CellOutcome {
                    label,
                    redraws: attempt,
                    tie,
                })
            }
            Err(Error::DegenerateInput(msg)) => reason = msg,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RedrawsExhausted {
        subsample_size: size,
        draw,
        redraws: config.max_redraws,
        reason,
    })
}

/// Estimate the rate of every discovery outcome at each subsample size by
/// drawing `S` subsamples with replacement and running the method on each.
///
/// Every (size, draw) cell derives its own random substream from the master
/// seed, so the result does not depend on how rayon schedules the cells.
pub fn estimate_cddr(data: &BivariateSample, config: &CddrConfig) -> Result<CddrCurve> {
    config.validate(data.len())?;
    let s = config.num_subsamples;
    let cells: Vec<(usize, usize)> = config
        .subsample_sizes
        .iter()
        .flat_map(|&n| (0..s).map(move |d| (n, d)))
        .collect();
    let outcomes = cells
        .par_iter()
        .map(|&(n, d)| run_cell(data, config, n, d))
        .collect::<Result<Vec<_>>>()?;

    let labels = config.method.labels();
    let mut points = Vec::with_capacity(config.subsample_sizes.len());
    for (j, &size) in config.subsample_sizes.iter().enumerate() {
        let chunk = &outcomes[j * s..(j + 1) * s];
        let mut counts: BTreeMap<String, usize> = labels.iter().map(|l| (l.to_string(), 0)).collect();
        for o in chunk {
            *counts.get_mut(o.label).expect("label from method") += 1;
        }
        let mut point = OutcomeRates {
            subsample_size: size,
            rates: BTreeMap::new(),
            se: BTreeMap::new(),
            ci_lower: BTreeMap::new(),
            ci_upper: BTreeMap::new(),
            redraw_count: chunk.iter().map(|o| o.redraws).sum(),
            tie_count: chunk.iter().filter(|o| o.tie).count(),
            counts,
        };
        for (label, &count) in &point.counts {
            let rate = count as f64 / s as f64;
            let ci = pointwise_ci(rate, s, config.alpha)?;
            point.rates.insert(label.clone(), rate);
            point.se.insert(label.clone(), ci.se);
            point.ci_lower.insert(label.clone(), ci.lower);
            point.ci_upper.insert(label.clone(), ci.upper);
        }
        points.push(point);
    }
    Ok(CddrCurve {
        config: config.clone(),
        n_total: data.len(),
        labels: labels.iter().map(|l| l.to_string()).collect(),
        hypothesized_label: config.method.label_for(config.hypothesized).to_string(),
        points,
    })
}
