//! CSV tables, result bundles and the files they land in.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const TOOL: &str = "shocklab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    /// Seventeen significant digits, independent of locale.
    pub fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_float(*v),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem; written as `<name>.csv`.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io {
            path: PathBuf::from(format!("{}.csv", self.name)),
            source: std::io::Error::other(e),
        };
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io {
            path: PathBuf::from(format!("{}.csv", self.name)),
            source: e.into_error(),
        })?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub timestamp: String,
    pub threads: usize,
    pub seed: Option<u64>,
}

/// One JSON document per run: resolved input echo, numeric payload, provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub payload: Value,
    pub provenance: Provenance,
}

impl ResultBundle {
    pub fn new(command: &str, config: RunConfig, payload: Value, threads: usize) -> Self {
        let seed = config.seed;
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            config,
            payload,
            provenance: Provenance {
                timestamp: chrono::Utc::now().to_rfc3339(),
                threads,
                seed,
            },
        }
    }
}

/// A finished command: its bundle plus any tables.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub bundle: ResultBundle,
    pub tables: Vec<Table>,
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write `<command>.json` and every table into `dir`; returns the paths written.
pub fn write_outcome(dir: &Path, outcome: &Outcome) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for t in &outcome.tables {
        let path = dir.join(format!("{}.csv", t.name));
        write_file(&path, &t.to_csv()?)?;
        written.push(path);
    }
    let path = dir.join(format!("{}.json", outcome.bundle.command));
    let text = serde_json::to_string_pretty(&outcome.bundle).expect("bundle serializes");
    write_file(&path, &text)?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.5), "-2.5000000000000000e0");
        assert_eq!(format_float(f64::NAN), "nan");
        for v in [0.1, 1.0 / 3.0, 5.0 / 18.0, -1e-300, 6.02e23] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn empty_cells_stay_empty() {
        let mut t = Table::new("t", &["x", "a", "b"]);
        t.push(vec![1.0.into(), None.into(), "label".into()]);
        assert_eq!(t.to_csv().unwrap(), "x,a,b\n1.0000000000000000e0,,label\n");
    }
}
