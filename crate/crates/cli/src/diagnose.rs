use std::fmt::Write;
use std::path::{Path, PathBuf};

use cddr_core::cddr::{clt_condition, estimate_cddr, CddrCurve, CltConditionReport, Method};
use cddr_core::discovery::{apply_transform, residualize, Transform};
use serde::Serialize;

use crate::args::DiagnoseArgs;
use crate::common::*;
use crate::config::{ConfigFile, List};
use crate::error::{usage, CliError, Result};
use crate::ingest::{ingest, ColumnMapping, ColumnRef, Format};
use crate::svg::{self, Panel, Series};

const DIAGNOSE_KEYS: [&str; 6] = ["input", "format", "x-col", "y-col", "transform", "confounders"];

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnoseOptions {
    pub input: PathBuf,
    pub format: Format,
    pub mapping: ColumnMapping,
    pub transform: Transform,
    pub curve: CurveOptions,
    pub seed: u64,
}

pub fn resolve(args: &DiagnoseArgs, cfg: &ConfigFile) -> Result<DiagnoseOptions> {
    let known: Vec<&str> = DIAGNOSE_KEYS.iter().chain(&CURVE_KEYS).copied().collect();
    cfg.check_keys(&known)?;
    let input: PathBuf = cfg
        .layer(args.input.clone(), "input")?
        .ok_or_else(|| CliError::Usage("--input is required".into()))?;
    let format = match layered_str(cfg, &args.format, "format") {
        Some(f) => f.parse()?,
        None if input.extension().is_some_and(|e| e == "txt") => Format::Pair,
        None => Format::Csv,
    };
    let confounders = match layered_str(cfg, &args.confounders, "confounders") {
        Some(c) => parse_flag::<List<String>>("confounders", &c)?.0,
        None => Vec::new(),
    };
    let mapping = ColumnMapping {
        x: layered_str(cfg, &args.x_col, "x-col").map(ColumnRef),
        y: layered_str(cfg, &args.y_col, "y-col").map(ColumnRef),
        confounders: confounders.into_iter().map(ColumnRef).collect(),
    };
    let transform = match layered_str(cfg, &args.transform, "transform") {
        Some(t) => t.parse().map_err(|e: cddr_core::Error| CliError::Usage(e.to_string()))?,
        None => Transform::Identity,
    };
    let curve = resolve_curve(&args.curve, cfg, Method::Lingam)?;
    let seed = curve.require_seed()?;
    Ok(DiagnoseOptions {
        input,
        format,
        mapping,
        transform,
        curve,
        seed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InputEcho {
    pub path: String,
    pub format: Format,
    pub sha256: String,
    pub x_col: String,
    pub y_col: String,
    pub confounders: Vec<String>,
    pub rows_used: usize,
    pub rows_dropped: usize,
    pub transform: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub master_seed: u64,
    pub input: Option<InputEcho>,
    pub config_file: Option<ConfigFileEcho>,
    pub options: serde_json::Value,
}

#[derive(Debug, Serialize)]
struct CddrDocument<'a> {
    schema_version: &'static str,
    kind: &'static str,
    manifest: &'a RunManifest,
    curve: &'a CddrCurve,
    clt_conditions: &'a [CltConditionReport],
}

#[derive(Debug, Serialize)]
pub struct TimedManifest<'a> {
    pub schema_version: &'static str,
    pub kind: &'static str,
    pub started_at: String,
    pub finished_at: String,
    pub artifacts: Vec<ArtifactDigest>,
    pub manifest: &'a RunManifest,
}

#[derive(Debug, Serialize)]
pub struct ArtifactDigest {
    pub file: String,
    pub sha256: String,
}

pub fn curve_csv(curve: &CddrCurve) -> String {
    let mut out = String::from("n,outcome_label,rate,se,ci_lower,ci_upper\n");
    for p in &curve.points {
        for label in &curve.labels {
            let _ = writeln!(
                out,
                "{},{label},{},{},{},{}",
                p.subsample_size, p.rates[label], p.se[label], p.ci_lower[label], p.ci_upper[label]
            );
        }
    }
    out
}

pub fn curve_svg(curve: &CddrCurve) -> String {
    let series = curve
        .labels
        .iter()
        .map(|l| Series {
            label: l.clone(),
            points: curve
                .points
                .iter()
                .map(|p| (p.subsample_size as f64, p.rates[l]))
                .collect(),
            band: curve
                .points
                .iter()
                .map(|p| (p.subsample_size as f64, p.ci_lower[l], p.ci_upper[l]))
                .collect(),
        })
        .collect();
    svg::render(&[Panel {
        title: format!(
            "{} discovery rate (N = {}, S = {}, hypothesized {})",
            curve.config.method.name(),
            curve.n_total,
            curve.config.num_subsamples,
            curve.hypothesized_label
        ),
        x_label: "subsample size".into(),
        y_label: "rate".into(),
        y_range: (0.0, 1.0),
        log_x: true,
        rules: Vec::new(),
        series,
    }])
}

pub fn clt_conditions(n_total: usize, num_subsamples: usize, grid: &[usize]) -> Vec<CltConditionReport> {
    grid.iter()
        .map(|&n| clt_condition(n_total, num_subsamples, n))
        .collect()
}

pub fn warn_clt(reports: &[CltConditionReport]) {
    for r in reports.iter().filter(|r| !r.pool_condition_holds) {
        eprintln!(
            "warning: N = {} <= S * n = {} * {}; the normal-approximation intervals at n = {} lack their sufficient condition",
            r.n_total, r.num_subsamples, r.subsample_size, r.subsample_size
        );
    }
}

pub fn run(args: &DiagnoseArgs) -> Result<Vec<PathBuf>> {
    let started_at = timestamp();
    let cfg = load_config(args.curve.config.as_deref())?;
    let opts = resolve(args, &cfg)?;
    let file = ingest(&opts.input, opts.format, &opts.mapping)?;
    if file.dropped > 0 {
        eprintln!(
            "warning: dropped {} rows with missing or non-numeric values (lines {:?}{})",
            file.dropped,
            file.dropped_lines,
            if file.dropped > file.dropped_lines.len() { ", ..." } else { "" }
        );
    }
    let mut data = apply_transform(&file.data, opts.transform)?;
    if !file.confounders.is_empty() {
        let conf: Vec<&[f64]> = file.confounders.iter().map(Vec::as_slice).collect();
        data = residualize(data.x(), data.y(), &conf)?;
    }
    let n_total = data.len();
    let config = opts.curve.cddr_config(n_total, opts.seed);
    if config.subsample_sizes.is_empty() {
        return usage(format!("no default subsample size fits in {n_total} rows; pass --grid"));
    }
    let curve = with_threads(opts.curve.threads, || estimate_cddr(&data, &config))??;
    let conditions = clt_conditions(n_total, config.num_subsamples, &config.subsample_sizes);
    warn_clt(&conditions);

    let manifest = RunManifest {
        tool: "cddr",
        version: TOOL_VERSION,
        command: "diagnose",
        master_seed: opts.seed,
        input: Some(InputEcho {
            path: file.path.display().to_string(),
            format: file.format,
            sha256: file.digest.clone(),
            x_col: file.x_col.clone(),
            y_col: file.y_col.clone(),
            confounders: file.confounder_cols.clone(),
            rows_used: file.data.len(),
            rows_dropped: file.dropped,
            transform: opts.transform.to_string(),
        }),
        config_file: ConfigFileEcho::of(&cfg)?,
        options: serde_json::to_value(&opts.curve).expect("serializable"),
    };
    let json = to_json(&CddrDocument {
        schema_version: SCHEMA_VERSION,
        kind: "cddr",
        manifest: &manifest,
        curve: &curve,
        clt_conditions: &conditions,
    });
    let csv = curve_csv(&curve);
    let svg = curve_svg(&curve);
    write_with_manifest(
        &opts.curve.out_dir,
        vec![("cddr.json", json), ("cddr.csv", csv), ("cddr.svg", svg)],
        "diagnose_manifest",
        started_at,
        &manifest,
    )
}

/// Write the artifacts plus `manifest.json`, which records timestamps and
/// artifact digests next to the run manifest.
pub fn write_with_manifest(
    out_dir: &Path,
    files: Vec<(&str, String)>,
    kind: &'static str,
    started_at: String,
    manifest: &RunManifest,
) -> Result<Vec<PathBuf>> {
    let mut artifacts = Artifacts::default();
    let digests = files
        .iter()
        .map(|(name, body)| ArtifactDigest {
            file: name.to_string(),
            sha256: crate::ingest::sha256_hex(body.as_bytes()),
        })
        .collect();
    for (name, body) in files {
        artifacts.add(out_dir.join(name), body);
    }
    artifacts.add(
        out_dir.join("manifest.json"),
        to_json(&TimedManifest {
            schema_version: SCHEMA_VERSION,
            kind,
            started_at,
            finished_at: timestamp(),
            artifacts: digests,
            manifest,
        }),
    );
    artifacts.write()
}
