//! Replication harness for the normal-approximation standard errors and
//! confidence intervals of CDDR rates.

use std::collections::BTreeMap;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cddr::{clt_condition, estimate_cddr, pointwise_ci, CddrConfig, Method};
use crate::discovery::Direction;
use crate::error::{invalid, Result};
use crate::numstat::{mean, quantile, sample_sd, RngStream};
use crate::simgen::SimSetting;

pub const MIN_REPLICATES: usize = 10;
pub const DEFAULT_REPLICATES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationConfig {
    pub setting: SimSetting,
    pub n_total: usize,
    pub subsample_sizes: Vec<usize>,
    pub num_subsamples: usize,
    pub replicates: usize,
    pub method: Method,
    pub hypothesized: Direction,
    pub alpha: f64,
    pub bootstrap_reps: usize,
    pub master_seed: u64,
}

impl ReplicationConfig {
    pub fn new(setting: SimSetting, n_total: usize, subsample_sizes: Vec<usize>, master_seed: u64) -> Self {
        let base = CddrConfig::new(Method::TestBased, n_total, master_seed);
        Self {
            setting,
            n_total,
            subsample_sizes,
            num_subsamples: base.num_subsamples,
            replicates: DEFAULT_REPLICATES,
            method: Method::TestBased,
            hypothesized: Direction::XtoY,
            alpha: base.alpha,
            bootstrap_reps: base.bootstrap_reps,
            master_seed,
        }
    }

    fn cddr_config(&self, seed: u64) -> CddrConfig {
        let mut c = CddrConfig::new(self.method, self.n_total, seed);
        c.hypothesized = self.hypothesized;
        c.subsample_sizes = self.subsample_sizes.clone();
        c.num_subsamples = self.num_subsamples;
        c.alpha = self.alpha;
        c.bootstrap_reps = self.bootstrap_reps;
        c
    }
}

/// Rate estimates over replicates: `rates[label][j][m]` for grid size `j`
/// and replicate `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateMatrix {
    pub setting: String,
    pub n_total: usize,
    pub subsample_sizes: Vec<usize>,
    pub num_subsamples: usize,
    pub hypothesized_label: String,
    pub rates: BTreeMap<String, Vec<Vec<f64>>>,
}

impl RateMatrix {
    pub fn replicates(&self) -> usize {
        self.rates
            .values()
            .next()
            .and_then(|rows| rows.first())
            .map_or(0, Vec::len)
    }

    /// Rates of the hypothesized outcome, indexed `[j][m]`.
    pub fn hypothesized(&self) -> &[Vec<f64>] {
        &self.rates[&self.hypothesized_label]
    }
}

/// Estimate the CDDR curve on `M` independently generated datasets.
pub fn replicate_cddr(config: &ReplicationConfig) -> Result<RateMatrix> {
    if config.replicates < MIN_REPLICATES {
        return invalid(format!(
            "need at least {MIN_REPLICATES} replicates, got {}",
            config.replicates
        ));
    }
    config.cddr_config(config.master_seed).validate(config.n_total)?;
    let root = RngStream::new(config.master_seed);
    let curves = (0..config.replicates)
        .into_par_iter()
        .map(|m| {
            let rep = root.child("rep", m as u64);
            let sim = config.setting.generate(config.n_total, &rep.child("data", 0))?;
            let seed = rep.child("cddr", 0).rng().next_u64();
            estimate_cddr(&sim.data, &config.cddr_config(seed))
        })
        .collect::<Result<Vec<_>>>()?;

    let labels = config.method.labels();
    let grid_len = config.subsample_sizes.len();
    let mut rates = BTreeMap::new();
    for label in labels {
        let rows = (0..grid_len)
            .map(|j| curves.iter().map(|c| c.points[j].rates[label]).collect())
            .collect();
        rates.insert(label.to_string(), rows);
    }
    Ok(RateMatrix {
        setting: config.setting.name().to_string(),
        n_total: config.n_total,
        subsample_sizes: config.subsample_sizes.clone(),
        num_subsamples: config.num_subsamples,
        hypothesized_label: config.method.label_for(config.hypothesized).to_string(),
        rates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasRecord {
    pub subsample_size: usize,
    pub mean_rate: f64,
    pub empirical_sd: f64,
    pub quantile_lower: f64,
    pub quantile_upper: f64,
    pub mean_se: f64,
    pub mean_se_bias: f64,
    pub mean_ci_lower_bias: f64,
    pub mean_ci_upper_bias: f64,
    /// Whether the pool is large enough for the normal approximation (`N > S n`).
    pub sufficient_conditions: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub setting: String,
    pub n_total: usize,
    pub num_subsamples: usize,
    pub replicates: usize,
    pub alpha: f64,
    pub hypothesized_label: String,
    pub labels: BTreeMap<String, Vec<BiasRecord>>,
}

impl ValidationReport {
    pub fn hypothesized(&self) -> &[BiasRecord] {
        &self.labels[&self.hypothesized_label]
    }
}

fn bias_record(size: usize, rates: &[f64], matrix: &RateMatrix, alpha: f64) -> Result<BiasRecord> {
    let sd = sample_sd(rates);
    let q_lo = quantile(rates, alpha / 2.0);
    let q_hi = quantile(rates, 1.0 - alpha / 2.0);
    let cis = rates
        .iter()
        .map(|&p| pointwise_ci(p, matrix.num_subsamples, alpha))
        .collect::<Result<Vec<_>>>()?;
    let m = rates.len() as f64;
    let mean_se = cis.iter().map(|c| c.se).sum::<f64>() / m;
    Ok(BiasRecord {
        subsample_size: size,
        mean_rate: mean(rates),
        empirical_sd: sd,
        quantile_lower: q_lo,
        quantile_upper: q_hi,
        mean_se,
        mean_se_bias: mean_se - sd,
        mean_ci_lower_bias: cis.iter().map(|c| c.lower - q_lo).sum::<f64>() / m,
        mean_ci_upper_bias: cis.iter().map(|c| c.upper - q_hi).sum::<f64>() / m,
        sufficient_conditions: clt_condition(matrix.n_total, matrix.num_subsamples, size)
            .pool_condition_holds,
    })
}

/// Compare estimated standard errors and interval bounds with the spread of
/// the rate estimates across replicates, for every outcome label.
pub fn bias_report(matrix: &RateMatrix, alpha: f64) -> Result<ValidationReport> {
    let m = matrix.replicates();
    if m < 2 {
        return invalid(format!("need at least 2 replicates for a bias report, got {m}"));
    }
    let mut labels = BTreeMap::new();
    for (label, rows) in &matrix.rates {
        if rows.len() != matrix.subsample_sizes.len() || rows.iter().any(|r| r.len() != m) {
            return invalid(format!("ragged rate matrix for {label}"));
        }
        let records = matrix
            .subsample_sizes
            .iter()
            .zip(rows)
            .map(|(&n, r)| bias_record(n, r, matrix, alpha))
            .collect::<Result<Vec<_>>>()?;
        labels.insert(label.clone(), records);
    }
    if !labels.contains_key(&matrix.hypothesized_label) {
        return invalid(format!("no rates for {}", matrix.hypothesized_label));
    }
    Ok(ValidationReport {
        setting: matrix.setting.clone(),
        n_total: matrix.n_total,
        num_subsamples: matrix.num_subsamples,
        replicates: m,
        alpha,
        hypothesized_label: matrix.hypothesized_label.clone(),
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numstat::sample_gmm;
    use crate::simgen::{Linearity, LinearitySetting};
    use rand::Rng;

    fn matrix_from(rows: Vec<Vec<f64>>, sizes: Vec<usize>, s: usize) -> RateMatrix {
        let mut rates = BTreeMap::new();
        rates.insert("x_to_y".to_string(), rows.clone());
        rates.insert(
            "y_to_x".to_string(),
            rows.iter().map(|r| r.iter().map(|p| 1.0 - p).collect()).collect(),
        );
        RateMatrix {
            setting: "oracle".into(),
            n_total: 10_000,
            subsample_sizes: sizes,
            num_subsamples: s,
            hypothesized_label: "x_to_y".into(),
            rates,
        }
    }

    #[test]
    fn constant_matrix() {
        let report = bias_report(&matrix_from(vec![vec![0.7; 20]], vec![50], 100), 0.05).unwrap();
        let r = &report.hypothesized()[0];
        assert_eq!(r.empirical_sd, 0.0);
        assert!((r.mean_se_bias - (0.21f64 / 100.0).sqrt()).abs() < 1e-15);
        assert!(r.sufficient_conditions);
    }

    #[test]
    fn too_few_replicates() {
        assert!(bias_report(&matrix_from(vec![vec![0.5]], vec![50], 100), 0.05).is_err());
        let mut c = ReplicationConfig::new(SimSetting::named("linear").unwrap(), 200, vec![20], 1);
        c.replicates = 2;
        assert!(replicate_cddr(&c).is_err());
    }

    #[test]
    fn binomial_oracle() {
        let s = 100;
        let mut rng = RngStream::new(99).rng();
        let mut se_bias = Vec::new();
        let mut q_bias = Vec::new();
        // average over many oracle matrices so the check is not at the mercy of one draw
        for trial in 0..20 {
            let row: Vec<f64> = (0..100)
                .map(|_| (0..s).filter(|_| rng.random::<f64>() < 0.5).count() as f64 / s as f64)
                .collect();
            let report = bias_report(&matrix_from(vec![row], vec![20], s), 0.05).unwrap();
            let r = &report.hypothesized()[0];
            se_bias.push(r.mean_se_bias);
            q_bias.push(r.mean_ci_lower_bias);
            q_bias.push(r.mean_ci_upper_bias);
            assert!(r.mean_se_bias.abs() < 0.01, "{}", r.mean_se_bias);
            if trial == 0 {
                assert!(r.mean_ci_lower_bias.abs() < 0.03 && r.mean_ci_upper_bias.abs() < 0.03);
            }
        }
        assert!(mean(&se_bias).abs() < 0.003);
        assert!(mean(&q_bias).abs() < 0.01);
    }

    #[test]
    fn exact_linear_has_no_spread() {
        let mut lin = LinearitySetting::new(Linearity::Linear);
        lin.noise_ratio = 0.0;
        lin.shift = 0.0;
        let mut c = ReplicationConfig::new(SimSetting::Linearity(lin), 300, vec![20, 60], 5);
        c.method = Method::Lingam;
        c.replicates = 10;
        c.num_subsamples = 10;
        let matrix = replicate_cddr(&c).unwrap();
        assert!(matrix.hypothesized().iter().flatten().all(|&p| p == 1.0));
        let report = bias_report(&matrix, 0.05).unwrap();
        assert!(report.hypothesized().iter().all(|r| r.empirical_sd == 0.0));
        assert_eq!(matrix, replicate_cddr(&c).unwrap());
    }

    #[test]
    fn report_ignores_replicate_order() {
        let spec = crate::simgen::gmm_k2();
        let raw = sample_gmm(60, &spec, &RngStream::new(3)).unwrap();
        let row: Vec<f64> = raw.iter().map(|v| (v.tanh() + 1.0) / 2.0).map(|p| (p * 50.0).round() / 50.0).collect();
        let mut rev = row.clone();
        rev.reverse();
        let a = bias_report(&matrix_from(vec![row], vec![30], 50), 0.05).unwrap();
        let b = bias_report(&matrix_from(vec![rev], vec![30], 50), 0.05).unwrap();
        for (x, y) in a.hypothesized().iter().zip(b.hypothesized()) {
            assert!((x.mean_se_bias - y.mean_se_bias).abs() < 1e-15);
            assert!((x.empirical_sd - y.empirical_sd).abs() < 1e-15);
            assert_eq!(x.quantile_lower, y.quantile_lower);
        }
    }
}
