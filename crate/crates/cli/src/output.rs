//! Report, table and manifest writing.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliResult;
use crate::params::Params;

/// Bumped whenever a report field changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "CONELAB_OUT";
pub const DEFAULT_OUT: &str = "conelab-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub json: bool,
    pub csv: bool,
}

impl Formats {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut f = Formats {
            json: false,
            csv: false,
        };
        for part in text.split(',').map(str::trim) {
            match part {
                "json" => f.json = true,
                "csv" => f.csv = true,
                other => return Err(format!("unknown format `{other}`; use json and/or csv")),
            }
        }
        Ok(f)
    }

    fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.json {
            v.push("json");
        }
        if self.csv {
            v.push("csv");
        }
        v
    }
}

/// Numeric table written as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self {
            name,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// What a command produces before anything touches the disk.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub result: Value,
    pub tables: Vec<Table>,
    /// Whether every mathematical contract of the command held.
    pub pass: bool,
}

impl Outcome {
    pub fn new<T: Serialize>(result: &T, pass: bool) -> CliResult<Self> {
        Ok(Self {
            result: serde_json::to_value(result)?,
            tables: Vec::new(),
            pass,
        })
    }

    pub fn with_table(mut self, t: Table) -> Self {
        self.tables.push(t);
        self
    }
}

pub fn resolve_out(flag: Option<&str>) -> PathBuf {
    flag.map(PathBuf::from)
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn write_json(path: &Path, v: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_csv(path: &Path, t: &Table) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&t.header)?;
    for row in &t.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the report, the tables and the manifest under `dir/<command>/`.
/// Returns the directory used.
pub fn write_all(
    dir: &Path,
    params: &Params,
    formats: Formats,
    expect_violation: bool,
    outcome: &Outcome,
    exit_code: i32,
) -> CliResult<PathBuf> {
    let dir = dir.join(&params.command);
    fs::create_dir_all(&dir)?;
    let mut artifacts = Vec::new();
    if formats.json {
        let report = json!({
            "schema_version": SCHEMA_VERSION,
            "command": params.command,
            "params": params.to_json(),
            "pass": outcome.pass,
            "result": outcome.result,
        });
        write_json(&dir.join("report.json"), &report)?;
        artifacts.push("report.json".to_string());
    }
    if formats.csv {
        for t in &outcome.tables {
            let name = format!("{}.csv", t.name);
            write_csv(&dir.join(&name), t)?;
            artifacts.push(name);
        }
    }
    let manifest = json!({
        "schema_version": SCHEMA_VERSION,
        "tool": "conelab",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": conelab::VERSION,
        "command": params.command,
        "config": params.to_json(),
        "formats": formats.names(),
        "expect_violation": expect_violation,
        "pass": outcome.pass,
        "exit_code": exit_code,
        "artifacts": artifacts,
    });
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(dir)
}
