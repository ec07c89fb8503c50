//! Flat `key = value` configuration files. Keys are flag names without the
//! leading dashes; `_` and `-` are interchangeable.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{usage, CliError, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub path: Option<PathBuf>,
    entries: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl ConfigFile {
    pub fn parse(text: &str, path: Option<&Path>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return usage(format!("config line {}: expected key = value, got {raw:?}", i + 1));
            };
            let key = normalize(key);
            if key.is_empty() {
                return usage(format!("config line {}: empty key", i + 1));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return usage(format!("config line {}: duplicate key {key:?}", i + 1));
            }
        }
        Ok(Self {
            path: path.map(Path::to_path_buf),
            entries,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, Some(path))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize(key)).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Reject keys the current subcommand does not understand.
    pub fn check_keys(&self, known: &[&str]) -> Result<()> {
        for key in self.keys() {
            if !known.contains(&key) {
                return usage(format!(
                    "unknown config key {key:?}; expected one of: {}",
                    known.join(", ")
                ));
            }
        }
        Ok(())
    }

    /// Config value for `key` parsed as `T`, if present.
    pub fn value<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key {key}: {e}"))),
        }
    }

    /// The flag if given, else the config value, else `None`.
    pub fn layer<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.value(key),
        }
    }

    /// The flag if given, else the config value, else `default`.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.layer(flag, key)?.unwrap_or(default))
    }
}

/// Comma-separated list, e.g. `20,40,60`.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: std::fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<T>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(List)
    }
}
