use std::fmt::Write;
use std::path::PathBuf;

use cddr_core::numstat::RngStream;
use cddr_core::simgen::SimSetting;
use serde::Serialize;

use crate::args::SimulateArgs;
use crate::common::*;
use crate::error::{usage, CliError, Result};
use crate::ingest::sha256_hex;
use crate::setting::build_setting;

pub const DEFAULT_N: usize = 10_000;
pub const DATA_FILE: &str = "simulated.csv";
pub const MANIFEST_FILE: &str = "simulate_manifest.json";

#[derive(Debug, Serialize)]
struct SimulateManifest<'a> {
    schema_version: &'static str,
    kind: &'static str,
    tool: &'static str,
    version: &'static str,
    setting_name: &'static str,
    setting: &'a SimSetting,
    n: usize,
    master_seed: u64,
    ground_truth: &'static str,
    data_file: &'static str,
    data_sha256: String,
}

pub fn run(args: &SimulateArgs) -> Result<Vec<PathBuf>> {
    let cfg = load_config(args.config.as_deref())?;
    let known: Vec<&str> = SETTING_KEYS.iter().chain(&["n", "seed", "out-dir"]).copied().collect();
    cfg.check_keys(&known)?;
    let setting = build_setting(&args.setting, &cfg, "linear")?;
    let n = cfg.resolve(args.n, "n", DEFAULT_N)?;
    if n < 3 {
        return usage(format!("--n must be at least 3, got {n}"));
    }
    let seed: u64 = cfg
        .layer(args.seed, "seed")?
        .ok_or_else(|| CliError::Usage("--seed is required (flag or config key `seed`)".into()))?;
    let out_dir: PathBuf = cfg.resolve(args.out_dir.clone(), "out-dir", PathBuf::from("."))?;

    let sim = setting.generate(n, &RngStream::new(seed))?;
    let mut csv = String::from("x,y\n");
    for (x, y) in sim.data.x().iter().zip(sim.data.y().iter()) {
        let _ = writeln!(csv, "{x},{y}");
    }
    let manifest = to_json(&SimulateManifest {
        schema_version: SCHEMA_VERSION,
        kind: "simulate_manifest",
        tool: "cddr",
        version: TOOL_VERSION,
        setting_name: setting.name(),
        setting: &setting,
        n,
        master_seed: seed,
        ground_truth: sim.ground_truth.label(),
        data_file: DATA_FILE,
        data_sha256: sha256_hex(csv.as_bytes()),
    });
    let mut artifacts = Artifacts::default();
    artifacts.add(out_dir.join(DATA_FILE), csv);
    artifacts.add(out_dir.join(MANIFEST_FILE), manifest);
    artifacts.write()
}
