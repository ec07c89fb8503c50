use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cddr_core::cddr::{default_grid, CddrConfig, Method, DEFAULT_ALPHA, DEFAULT_SUBSAMPLES};
use cddr_core::discovery::{Direction, DEFAULT_BOOTSTRAP_REPS};
use serde::Serialize;

use crate::args::CurveArgs;
use crate::config::{ConfigFile, List};
use crate::error::{usage, CliError, Result};
use crate::ingest::sha256_hex;

pub const SCHEMA_VERSION: &str = "1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CURVE_KEYS: [&str; 10] = [
    "method",
    "hypothesized",
    "alpha",
    "subsamples",
    "grid",
    "bootstrap-b",
    "seed",
    "out-dir",
    "threads",
    "max-redraws",
];

pub const SETTING_KEYS: [&str; 9] = [
    "setting",
    "shift",
    "beta",
    "noise-ratio",
    "noise-weights",
    "noise-means",
    "noise-sds",
    "x-rate",
    "x-upper",
];

pub fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

pub fn parse_flag<T: FromStr>(name: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse()
        .map_err(|e| CliError::Usage(format!("--{name} {raw:?}: {e}")))
}

/// String option from flag or config.
pub fn layered_str(cfg: &ConfigFile, flag: &Option<String>, key: &str) -> Option<String> {
    flag.clone().or_else(|| cfg.get(key).map(str::to_string))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveOptions {
    pub method: Method,
    pub hypothesized: Direction,
    pub alpha: f64,
    pub subsamples: usize,
    pub grid: Option<Vec<usize>>,
    pub bootstrap_b: usize,
    pub seed: Option<u64>,
    pub max_redraws: usize,
    #[serde(skip)]
    pub out_dir: PathBuf,
    #[serde(skip)]
    pub threads: Option<usize>,
}

pub fn resolve_curve(args: &CurveArgs, cfg: &ConfigFile, default_method: Method) -> Result<CurveOptions> {
    let method = match layered_str(cfg, &args.method, "method") {
        Some(m) => Method::parse(&m).map_err(|e| CliError::Usage(e.to_string()))?,
        None => default_method,
    };
    let hypothesized = match layered_str(cfg, &args.hypothesized, "hypothesized") {
        Some(d) => Direction::parse(&d).map_err(|e| CliError::Usage(e.to_string()))?,
        None => Direction::XtoY,
    };
    let grid = match layered_str(cfg, &args.grid, "grid") {
        Some(g) => Some(parse_flag::<List<usize>>("grid", &g)?.0),
        None => None,
    };
    let threads = cfg.layer(args.threads, "threads")?;
    if threads == Some(0) {
        return usage("--threads must be positive");
    }
    Ok(CurveOptions {
        method,
        hypothesized,
        alpha: cfg.resolve(args.alpha, "alpha", DEFAULT_ALPHA)?,
        subsamples: cfg.resolve(args.subsamples, "subsamples", DEFAULT_SUBSAMPLES)?,
        grid,
        bootstrap_b: cfg.resolve(args.bootstrap_b, "bootstrap-b", DEFAULT_BOOTSTRAP_REPS)?,
        seed: cfg.layer(args.seed, "seed")?,
        max_redraws: cfg.resolve(None, "max-redraws", cddr_core::cddr::DEFAULT_MAX_REDRAWS)?,
        out_dir: cfg.resolve(args.out_dir.clone(), "out-dir", PathBuf::from("."))?,
        threads,
    })
}

impl CurveOptions {
    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| CliError::Usage("--seed is required (flag or config key `seed`)".into()))
    }

    pub fn cddr_config(&self, n_total: usize, seed: u64) -> CddrConfig {
        let mut c = CddrConfig::new(self.method, n_total, seed);
        c.hypothesized = self.hypothesized;
        c.subsample_sizes = self.grid.clone().unwrap_or_else(|| default_grid(n_total));
        c.num_subsamples = self.subsamples;
        c.alpha = self.alpha;
        c.bootstrap_reps = self.bootstrap_b;
        c.max_redraws = self.max_redraws;
        c
    }
}

/// Run `f` on a dedicated pool when a thread count is given.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigFileEcho {
    pub path: String,
    pub sha256: String,
}

impl ConfigFileEcho {
    pub fn of(cfg: &ConfigFile) -> Result<Option<Self>> {
        match &cfg.path {
            None => Ok(None),
            Some(p) => {
                let bytes = fs::read(p).map_err(|e| CliError::io(p, e))?;
                Ok(Some(Self {
                    path: p.display().to_string(),
                    sha256: sha256_hex(&bytes),
                }))
            }
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Files rendered in memory and written together. If any write fails the
/// files already written are removed.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(PathBuf, String)>,
}

impl Artifacts {
    pub fn add(&mut self, path: PathBuf, contents: String) {
        self.files.push((path, contents));
    }

    pub fn write(self) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (path, contents) in &self.files {
            let res = path
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .map_or(Ok(()), fs::create_dir_all)
                .and_then(|_| fs::write(path, contents));
            if let Err(e) = res {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(CliError::io(path, e));
            }
            written.push(path.clone());
        }
        Ok(written)
    }
}
