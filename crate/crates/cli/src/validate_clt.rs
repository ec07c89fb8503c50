use std::path::PathBuf;

use cddr_core::cddr::{CltConditionReport, Method};
use cddr_core::cltvalidate::{
    bias_report, replicate_cddr, RateMatrix, ReplicationConfig, ValidationReport, DEFAULT_REPLICATES,
    MIN_REPLICATES,
};
use serde::Serialize;

use crate::args::ValidateCltArgs;
use crate::common::*;
use crate::diagnose::{clt_conditions, warn_clt, write_with_manifest, RunManifest};
use crate::error::{usage, Result};
use crate::setting::build_setting;
use crate::svg::{self, Panel, Series};

pub const DEFAULT_N_TOTAL: usize = 10_000;
pub const DEFAULT_GRID: [usize; 6] = [20, 40, 60, 80, 100, 120];

#[derive(Debug, Serialize)]
struct CltDocument<'a> {
    schema_version: &'static str,
    kind: &'static str,
    manifest: &'a RunManifest,
    report: &'a ValidationReport,
    clt_conditions: &'a [CltConditionReport],
    rates: &'a RateMatrix,
}

pub fn report_svg(report: &ValidationReport) -> String {
    let records = report.hypothesized();
    let line = |label: &str, f: &dyn Fn(&cddr_core::cltvalidate::BiasRecord) -> f64| Series {
        label: label.to_string(),
        points: records.iter().map(|r| (r.subsample_size as f64, f(r))).collect(),
        band: Vec::new(),
    };
    let biases = vec![
        line("mean_se_bias", &|r| r.mean_se_bias),
        line("mean_ci_lower_bias", &|r| r.mean_ci_lower_bias),
        line("mean_ci_upper_bias", &|r| r.mean_ci_upper_bias),
    ];
    let spread = vec![
        line("empirical_sd", &|r| r.empirical_sd),
        line("mean_se", &|r| r.mean_se),
    ];
    let bias_max = biases
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1.abs()))
        .fold(0.05f64, f64::max);
    let spread_max = spread
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .fold(0.1f64, f64::max);
    svg::render(&[
        Panel {
            title: format!("Bias of {} (S = {}, M = {})", report.hypothesized_label, report.num_subsamples, report.replicates),
            x_label: "subsample size".into(),
            y_label: "bias".into(),
            y_range: (-bias_max * 1.1, bias_max * 1.1),
            log_x: false,
            rules: vec![0.0],
            series: biases,
        },
        Panel {
            title: "Variability".into(),
            x_label: "subsample size".into(),
            y_label: "sd".into(),
            y_range: (0.0, spread_max * 1.1),
            log_x: false,
            rules: Vec::new(),
            series: spread,
        },
    ])
}

pub fn run(args: &ValidateCltArgs) -> Result<Vec<PathBuf>> {
    let started_at = timestamp();
    let cfg = load_config(args.curve.config.as_deref())?;
    let known: Vec<&str> = SETTING_KEYS
        .iter()
        .chain(&CURVE_KEYS)
        .chain(&["n-total", "replicates"])
        .copied()
        .collect();
    cfg.check_keys(&known)?;
    let setting = build_setting(&args.setting, &cfg, "slightly_nonlinear")?;
    let n_total = cfg.resolve(args.n_total, "n-total", DEFAULT_N_TOTAL)?;
    let replicates = cfg.resolve(args.replicates, "replicates", DEFAULT_REPLICATES)?;
    if replicates < MIN_REPLICATES {
        return usage(format!("--replicates must be at least {MIN_REPLICATES}, got {replicates}"));
    }
    let mut curve = resolve_curve(&args.curve, &cfg, Method::TestBased)?;
    let seed = curve.require_seed()?;
    let grid = curve.grid.get_or_insert_with(|| DEFAULT_GRID.to_vec()).clone();

    let mut config = ReplicationConfig::new(setting.clone(), n_total, grid.clone(), seed);
    config.num_subsamples = curve.subsamples;
    config.replicates = replicates;
    config.method = curve.method;
    config.hypothesized = curve.hypothesized;
    config.alpha = curve.alpha;
    config.bootstrap_reps = curve.bootstrap_b;
    let matrix = with_threads(curve.threads, || replicate_cddr(&config))??;
    let report = bias_report(&matrix, curve.alpha)?;
    let conditions = clt_conditions(n_total, curve.subsamples, &grid);
    warn_clt(&conditions);

    let mut options = serde_json::to_value(&curve).expect("serializable");
    options["n_total"] = n_total.into();
    options["replicates"] = replicates.into();
    options["setting"] = serde_json::to_value(&setting).expect("serializable");
    let manifest = RunManifest {
        tool: "cddr",
        version: TOOL_VERSION,
        command: "validate-clt",
        master_seed: seed,
        input: None,
        config_file: ConfigFileEcho::of(&cfg)?,
        options,
    };
    let json = to_json(&CltDocument {
        schema_version: SCHEMA_VERSION,
        kind: "clt_report",
        manifest: &manifest,
        report: &report,
        clt_conditions: &conditions,
        rates: &matrix,
    });
    write_with_manifest(
        &curve.out_dir,
        vec![("clt_report.json", json), ("clt_report.svg", report_svg(&report))],
        "validate_clt_manifest",
        started_at,
        &manifest,
    )
}
