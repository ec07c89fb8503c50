use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn cddr(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cddr"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("run cddr")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap()
}

fn schema(name: &str) -> Value {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let validator = jsonschema::validator_for(&schema(schema_name)).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:?}");
}

fn simulate(dir: &Path, setting: &str, n: &str, seed: &str) -> PathBuf {
    let out = dir.join(format!("sim_{setting}_{n}_{seed}"));
    ok(&cddr(
        &["simulate", "--setting", setting, "--n", n, "--seed", seed, "--out-dir", out.to_str().unwrap()],
        dir,
    ));
    out
}

fn read_csv(path: &Path) -> Vec<(f64, f64)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect()
}

fn polylines(svg: &str) -> Vec<(String, Vec<(f64, f64)>)> {
    let doc = roxmltree::Document::parse(svg).expect("well-formed svg");
    doc.descendants()
        .filter(|n| n.has_tag_name("polyline") && n.attribute("class") == Some("series"))
        .map(|n| {
            let pts = n
                .attribute("points")
                .unwrap()
                .split_whitespace()
                .map(|p| {
                    let (x, y) = p.split_once(',').unwrap();
                    (x.parse().unwrap(), y.parse().unwrap())
                })
                .collect();
            (n.attribute("data-label").unwrap().to_string(), pts)
        })
        .collect()
}

fn diagnose(dir: &Path, input: &Path, out: &str, extra: &[&str]) -> Output {
    let mut args = vec!["diagnose", "--input", input.to_str().unwrap(), "--out-dir", out];
    args.extend_from_slice(extra);
    cddr(&args, dir)
}

#[test]
fn lingam_outputs_two_series() {
    let tmp = TempDir::new().unwrap();
    let sim = simulate(tmp.path(), "linear", "400", "3");
    let out = diagnose(tmp.path(), &sim.join("simulated.csv"), "run", &["--seed", "9", "--subsamples", "20"]);
    ok(&out);
    let doc = json(tmp.path().join("run/cddr.json"));
    assert_valid("cddr.schema.json", &doc);
    assert_valid("manifest.schema.json", &json(tmp.path().join("run/manifest.json")));
    assert_eq!(doc["curve"]["labels"], serde_json::json!(["x_to_y", "y_to_x"]));
    let svg = fs::read_to_string(tmp.path().join("run/cddr.svg")).unwrap();
    let lines = polylines(&svg);
    assert_eq!(lines.iter().map(|l| l.0.as_str()).collect::<Vec<_>>(), vec!["x_to_y", "y_to_x"]);
    // default grid capped at N = 400
    assert_eq!(doc["curve"]["points"].as_array().unwrap().len(), 8);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("warning: N = 400 <= S * n"), "{stderr}");
}

#[test]
fn testbased_outputs_four_series_and_csv_matches_json() {
    let tmp = TempDir::new().unwrap();
    let sim = simulate(tmp.path(), "slightly_nonlinear", "300", "4");
    ok(&diagnose(
        tmp.path(),
        &sim.join("simulated.csv"),
        "tb",
        &["--seed", "2", "--method", "testbased", "--grid", "20,60,150", "--subsamples", "10", "--bootstrap-b", "99"],
    ));
    let doc = json(tmp.path().join("tb/cddr.json"));
    assert_valid("cddr.schema.json", &doc);
    let labels: Vec<&str> = doc["curve"]["labels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(labels, vec!["fail_reject_both", "favors_x_to_y", "favors_y_to_x", "reject_both"]);

    let csv = fs::read_to_string(tmp.path().join("tb/cddr.csv")).unwrap();
    let mut rows = csv.lines();
    assert_eq!(rows.next(), Some("n,outcome_label,rate,se,ci_lower,ci_upper"));
    let points = doc["curve"]["points"].as_array().unwrap();
    let mut count = 0;
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        let point = points
            .iter()
            .find(|p| p["subsample_size"].as_u64().unwrap().to_string() == f[0])
            .unwrap();
        for (i, key) in ["rates", "se", "ci_lower", "ci_upper"].iter().enumerate() {
            let from_csv: f64 = f[2 + i].parse().unwrap();
            assert_eq!(from_csv, point[key][f[1]].as_f64().unwrap(), "{row}");
        }
        count += 1;
    }
    assert_eq!(count, 12);

    let svg = fs::read_to_string(tmp.path().join("tb/cddr.svg")).unwrap();
    let lines = polylines(&svg);
    assert_eq!(lines.len(), 4);
    let (top, bottom) = cddr_cli::svg::plot_y_bounds();
    for (label, pts) in &lines {
        for (j, &(_, y)) in pts.iter().enumerate() {
            assert!(y >= top - 1e-9 && y <= bottom + 1e-9);
            let rate = points[j]["rates"][label].as_f64().unwrap();
            let expected = bottom - rate * (bottom - top);
            assert!((y - expected).abs() < 0.006, "{label} {y} {expected}");
        }
    }
}

#[test]
fn rerun_is_byte_identical_across_thread_counts() {
    let tmp = TempDir::new().unwrap();
    let sim = simulate(tmp.path(), "non_gaussian", "250", "5");
    let input = sim.join("simulated.csv");
    let common = ["--seed", "11", "--method", "testbased", "--grid", "20,50", "--subsamples", "8", "--bootstrap-b", "99"];
    for (dir, threads) in [("a", "1"), ("b", "2"), ("c", "8")] {
        let mut args = common.to_vec();
        args.extend(["--threads", threads]);
        ok(&diagnose(tmp.path(), &input, dir, &args));
    }
    for f in ["cddr.json", "cddr.csv", "cddr.svg"] {
        let a = fs::read(tmp.path().join("a").join(f)).unwrap();
        assert_eq!(a, fs::read(tmp.path().join("b").join(f)).unwrap(), "{f}");
        assert_eq!(a, fs::read(tmp.path().join("c").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn flag_overrides_config_overrides_default() {
    let tmp = TempDir::new().unwrap();
    let sim = simulate(tmp.path(), "linear", "200", "6");
    fs::write(tmp.path().join("run.cfg"), "alpha = 0.1\nsubsamples = 12\ngrid = 20,40\nseed = 5\n").unwrap();
    let input = sim.join("simulated.csv");
    ok(&diagnose(tmp.path(), &input, "o1", &["--config", "run.cfg", "--subsamples", "15"]));
    let opts = json(tmp.path().join("o1/cddr.json"))["manifest"]["options"].clone();
    assert_eq!(opts["subsamples"], 15);
    assert_eq!(opts["alpha"], 0.1);
    assert_eq!(opts["seed"], 5);
    assert_eq!(opts["bootstrap_b"], 199);
    assert_eq!(opts["grid"], serde_json::json!([20, 40]));
    let doc = json(tmp.path().join("o1/cddr.json"));
    assert_eq!(doc["manifest"]["config_file"]["path"], "run.cfg");
    assert_eq!(doc["curve"]["points"][0]["counts"]["x_to_y"].as_u64().unwrap()
        + doc["curve"]["points"][0]["counts"]["y_to_x"].as_u64().unwrap(), 15);
}

#[test]
fn seed_is_required() {
    let tmp = TempDir::new().unwrap();
    let sim = simulate(tmp.path(), "linear", "100", "1");
    let out = diagnose(tmp.path(), &sim.join("simulated.csv"), "o", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("o").exists());
    assert_eq!(cddr(&["simulate", "--setting", "linear"], tmp.path()).status.code(), Some(2));
}

#[test]
fn exit_codes_and_no_partial_artifacts() {
    let tmp = TempDir::new().unwrap();
    let p = tmp.path();
    fs::write(p.join("two.csv"), "x,y\n1,2\n3,4\n").unwrap();
    let out = diagnose(p, &p.join("two.csv"), "o", &["--seed", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("need at least 3"));
    assert_eq!(diagnose(p, &p.join("missing.csv"), "o", &["--seed", "1"]).status.code(), Some(3));
    assert_eq!(diagnose(p, &p.join("two.csv"), "o", &["--seed", "1", "--method", "magic"]).status.code(), Some(2));
    assert_eq!(cddr(&["diagnose", "--bogus"], p).status.code(), Some(2));

    let rows: String = (0..60).map(|i| format!("1.5,{}\n", i as f64 * 0.3)).collect();
    fs::write(p.join("const.csv"), format!("x,y\n{rows}")).unwrap();
    let out = diagnose(p, &p.join("const.csv"), "o", &["--seed", "1", "--grid", "20"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(!p.join("o").exists());

    // out-dir is a regular file: nothing may be left behind
    let sim = simulate(p, "linear", "100", "2");
    fs::write(p.join("blocker"), "x").unwrap();
    let out = diagnose(p, &sim.join("simulated.csv"), "blocker/sub", &["--seed", "1", "--grid", "20", "--subsamples", "5"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(fs::read_to_string(p.join("blocker")).unwrap(), "x");
}

#[test]
fn pair_input_with_transform_and_confounders() {
    let tmp = TempDir::new().unwrap();
    let p = tmp.path();
    let rows: String = (1..=120)
        .map(|i| {
            let x = i as f64 / 10.0;
            format!("{x} {} {}\n", 2.0 * x + (i as f64 * 1.7).sin(), (i as f64 * 0.37).cos())
        })
        .collect();
    fs::write(p.join("pair0001.txt"), format!("{rows}oops 1 2\n")).unwrap();
    let out = diagnose(
        p,
        &p.join("pair0001.txt"),
        "o",
        &["--seed", "3", "--grid", "20,60", "--subsamples", "10", "--transform", "log", "--confounders", "2"],
    );
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stderr).contains("dropped 1 rows"));
    let doc = json(p.join("o/cddr.json"));
    let input = &doc["manifest"]["input"];
    assert_eq!(input["format"], "pair");
    assert_eq!(input["rows_used"], 120);
    assert_eq!(input["rows_dropped"], 1);
    assert_eq!(input["transform"], "log");
    assert_eq!(input["confounders"], serde_json::json!(["2"]));
}

#[test]
fn simulate_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let a = simulate(tmp.path(), "linear", "10000", "7");
    let b_dir = tmp.path().join("again");
    ok(&cddr(
        &["simulate", "--setting", "linear", "--n", "10000", "--seed", "7", "--out-dir", b_dir.to_str().unwrap()],
        tmp.path(),
    ));
    for f in ["simulated.csv", "simulate_manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b_dir.join(f)).unwrap());
    }
    assert_valid("simulate_manifest.schema.json", &json(a.join("simulate_manifest.json")));
    let out = cddr(&["simulate", "--setting", "cubic", "--seed", "1"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for name in ["linear", "slightly_nonlinear", "nonlinear_p3", "gaussian", "slightly_non_gaussian", "non_gaussian"] {
        assert!(err.contains(name), "{err}");
    }
}

fn excess_kurtosis(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let m2 = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m4 = v.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    m4 / (m2 * m2) - 3.0
}

#[test]
fn simulated_gaussian_columns_are_gaussian() {
    let tmp = TempDir::new().unwrap();
    let rows = read_csv(&simulate(tmp.path(), "gaussian", "100000", "8").join("simulated.csv"));
    let x: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.1).collect();
    assert!(excess_kurtosis(&x).abs() < 0.1);
    assert!(excess_kurtosis(&y).abs() < 0.1);
}

/// t statistic of the X^2 coefficient in the least-squares fit of Y on (1, X, X^2).
fn quadratic_t(rows: &[(f64, f64)]) -> f64 {
    let n = rows.len() as f64;
    let mut xtx = [[0.0f64; 3]; 3];
    let mut xty = [0.0f64; 3];
    for &(x, y) in rows {
        let r = [1.0, x, x * x];
        for i in 0..3 {
            xty[i] += r[i] * y;
            for j in 0..3 {
                xtx[i][j] += r[i] * r[j];
            }
        }
    }
    let inv = invert3(xtx);
    let beta: Vec<f64> = (0..3).map(|i| (0..3).map(|j| inv[i][j] * xty[j]).sum()).collect();
    let rss: f64 = rows
        .iter()
        .map(|&(x, y)| (y - beta[0] - beta[1] * x - beta[2] * x * x).powi(2))
        .sum();
    let sigma2 = rss / (n - 3.0);
    beta[2] / (sigma2 * inv[2][2]).sqrt()
}

fn invert3(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, d) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[a][c] * m[b][d] - m[a][d] * m[b][c]) / det;
        }
    }
    inv
}

#[test]
fn simulated_cubic_is_nonlinear() {
    let tmp = TempDir::new().unwrap();
    let rows = read_csv(&simulate(tmp.path(), "nonlinear_p3", "100000", "9").join("simulated.csv"));
    assert!(quadratic_t(&rows).abs() > 10.0);
    // the oracle itself: exact quadratic data gives a huge statistic, pure line a small one
    let line: Vec<(f64, f64)> = (0..500).map(|i| (i as f64 / 50.0, 1.0 + 2.0 * i as f64 / 50.0 + ((i * 7919) % 13) as f64 * 0.01)).collect();
    assert!(quadratic_t(&line).abs() < 10.0);
}

#[test]
fn validate_clt_conditions_and_minimum_replicates() {
    let tmp = TempDir::new().unwrap();
    let p = tmp.path();
    let presets = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets");
    let s100 = presets.join("clt_s100.cfg");
    let out = cddr(
        &["validate-clt", "--config", s100.to_str().unwrap(), "--seed", "1", "--replicates", "2", "--out-dir", "m2"],
        p,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!p.join("m2").exists());

    let run = |cfg: &Path, dir: &str| {
        ok(&cddr(
            &[
                "validate-clt", "--config", cfg.to_str().unwrap(), "--seed", "4", "--replicates", "10",
                "--method", "lingam", "--out-dir", dir,
            ],
            p,
        ));
        let doc = json(p.join(dir).join("clt_report.json"));
        assert_valid("clt_report.schema.json", &doc);
        assert_valid("manifest.schema.json", &json(p.join(dir).join("manifest.json")));
        let svg = fs::read_to_string(p.join(dir).join("clt_report.svg")).unwrap();
        let doc_svg = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc_svg.descendants().filter(|n| n.attribute("class") == Some("panel")).count(), 2);
        doc["report"]["labels"]["x_to_y"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| (r["subsample_size"].as_u64().unwrap(), r["sufficient_conditions"].as_bool().unwrap()))
            .collect::<Vec<_>>()
    };
    assert_eq!(
        run(&s100, "s100"),
        vec![(20, true), (40, true), (60, true), (80, true), (100, false), (120, false)]
    );
    assert!(run(&presets.join("clt_s500.cfg"), "s500").iter().all(|r| !r.1));
}

#[test]
fn presets_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        cddr_cli::config::ConfigFile::load(&path).unwrap();
        n += 1;
    }
    assert!(n >= 10);
}
