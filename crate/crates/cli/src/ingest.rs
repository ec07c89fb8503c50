//! Reading bivariate datasets from csv and whitespace-separated pair files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cddr_core::discovery::BivariateSample;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{data, usage, CliError, Result};

pub const MIN_ROWS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Pair,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "pair" => Ok(Format::Pair),
            other => usage(format!("unknown format {other:?}, expected csv or pair")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Pair => "pair",
        })
    }
}

/// A column given by header name or zero-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnRef(pub String);

impl ColumnRef {
    pub fn index(i: usize) -> Self {
        ColumnRef(i.to_string())
    }

    fn resolve(&self, header: Option<&[String]>, width: usize) -> Result<usize> {
        if let Some(i) = header.and_then(|h| h.iter().position(|name| name == &self.0)) {
            return Ok(i);
        }
        match self.0.parse::<usize>() {
            Ok(i) if i < width => Ok(i),
            Ok(i) => data(format!("column index {i} out of range: the file has {width} columns")),
            Err(_) if header.is_some() => data(format!("no column named {:?} in the header", self.0)),
            Err(_) => data(format!(
                "column {:?} given by name but the file has no header row",
                self.0
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ColumnMapping {
    pub x: Option<ColumnRef>,
    pub y: Option<ColumnRef>,
    pub confounders: Vec<ColumnRef>,
}

#[derive(Debug, Clone)]
pub struct DatasetFile {
    pub path: PathBuf,
    pub format: Format,
    pub x_col: String,
    pub y_col: String,
    pub confounder_cols: Vec<String>,
    pub data: BivariateSample,
    pub confounders: Vec<Vec<f64>>,
    /// Rows skipped for missing or non-numeric entries in a mapped column.
    pub dropped: usize,
    /// 1-based line numbers of the first few dropped rows.
    pub dropped_lines: Vec<usize>,
    /// Hex SHA-256 of the raw file bytes.
    pub digest: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn split_records(text: &str, format: Format) -> Result<Vec<(usize, Vec<String>)>> {
    match format {
        Format::Pair => Ok(text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .map(|(i, l)| (i + 1, l.split_whitespace().map(str::to_string).collect()))
            .collect()),
        Format::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(false)
                .flexible(true)
                .trim(csv::Trim::All)
                .comment(Some(b'#'))
                .from_reader(text.as_bytes());
            let mut out = Vec::new();
            for rec in reader.records() {
                let rec = rec.map_err(|e| CliError::Data(format!("malformed csv: {e}")))?;
                let line = rec.position().map_or(0, |p| p.line() as usize);
                if rec.iter().all(str::is_empty) {
                    continue;
                }
                out.push((line, rec.iter().map(str::to_string).collect()));
            }
            Ok(out)
        }
    }
}

fn numeric(field: Option<&String>) -> Option<f64> {
    field
        .and_then(|f| f.parse::<f64>().ok())
        .filter(|v| v.is_finite())
}

/// Parse the bytes of a dataset file. The first row is a header when any
/// of its fields is not a number.
pub fn parse_dataset(bytes: &[u8], path: &Path, format: Format, mapping: &ColumnMapping) -> Result<DatasetFile> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| CliError::Data(format!("{}: not valid UTF-8: {e}", path.display())))?;
    let mut records = split_records(text, format)?;
    if records.is_empty() {
        return data(format!("{}: no data rows", path.display()));
    }
    let header = if records[0].1.iter().any(|f| f.parse::<f64>().is_err()) {
        Some(records.remove(0).1)
    } else {
        None
    };
    let width = header
        .as_ref()
        .map(Vec::len)
        .unwrap_or_else(|| records.iter().map(|r| r.1.len()).max().unwrap_or(0));
    let x = mapping.x.clone().unwrap_or(ColumnRef::index(0)).resolve(header.as_deref(), width)?;
    let y = mapping.y.clone().unwrap_or(ColumnRef::index(1)).resolve(header.as_deref(), width)?;
    let conf = mapping
        .confounders
        .iter()
        .map(|c| c.resolve(header.as_deref(), width))
        .collect::<Result<Vec<_>>>()?;
    let mut columns = vec![x, y];
    columns.extend(&conf);
    if (1..columns.len()).any(|i| columns[..i].contains(&columns[i])) {
        return usage("x, y and confounder columns must be distinct");
    }

    let mut values: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];
    let mut dropped = 0;
    let mut dropped_lines = Vec::new();
    for (line, rec) in &records {
        let row: Option<Vec<f64>> = columns.iter().map(|&c| numeric(rec.get(c))).collect();
        match row {
            Some(row) => values.iter_mut().zip(row).for_each(|(col, v)| col.push(v)),
            None => {
                dropped += 1;
                if dropped_lines.len() < 10 {
                    dropped_lines.push(*line);
                }
            }
        }
    }
    let usable = values[0].len();
    if usable < MIN_ROWS {
        return data(format!(
            "{}: {usable} usable rows ({dropped} dropped), need at least {MIN_ROWS}",
            path.display()
        ));
    }
    let name = |c: usize| header.as_ref().map_or_else(|| c.to_string(), |h| h[c].clone());
    let mut cols = values.into_iter();
    let xs = cols.next().expect("x column");
    let ys = cols.next().expect("y column");
    Ok(DatasetFile {
        path: path.to_path_buf(),
        format,
        x_col: name(x),
        y_col: name(y),
        confounder_cols: conf.iter().map(|&c| name(c)).collect(),
        data: BivariateSample::new(xs, ys)?,
        confounders: cols.collect(),
        dropped,
        dropped_lines,
        digest: sha256_hex(bytes),
    })
}

pub fn ingest(path: &Path, format: Format, mapping: &ColumnMapping) -> Result<DatasetFile> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    parse_dataset(&bytes, path, format, mapping)
}
