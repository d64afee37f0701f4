//! Run results: measured values with error estimates, named assertions, plot series and
//! tables, wrapped in a JSON envelope keyed by a digest of the inputs.

use std::collections::BTreeMap;
use std::fmt::Display;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use chiral_bag::config::Config;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub name: String,
    pub value: f64,
    /// Absolute error estimate; 0 for values that are exact as computed (counts, residuals).
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub yerr: f64,
}

/// Rectangular numeric output written as CSV next to the envelope.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// What a suite produces before it is stamped with a command, digest and timing.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub values: Vec<Measured>,
    pub assertions: Vec<Assertion>,
    pub series: BTreeMap<String, Vec<Point>>,
    pub tables: Vec<Table>,
    /// Structured, non-numeric output (e.g. symbolic constraints).
    pub data: serde_json::Map<String, serde_json::Value>,
}

impl Report {
    pub fn value(&mut self, name: impl Into<String>, value: f64, error: f64) {
        self.values.push(Measured { name: name.into(), value, error });
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) -> bool {
        self.assertions.push(Assertion { name: name.into(), pass, detail: detail.into() });
        pass
    }

    /// Passes the value through, or records a failed assertion carrying the error.
    pub fn guard<T, E: Display>(&mut self, name: &str, r: Result<T, E>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.check(name, false, e.to_string());
                None
            }
        }
    }

    pub fn series(&mut self, name: impl Into<String>, points: Vec<Point>) {
        self.series.insert(name.into(), points);
    }

    pub fn merge(&mut self, other: Report) {
        self.values.extend(other.values);
        self.assertions.extend(other.assertions);
        self.series.extend(other.series);
        self.tables.extend(other.tables);
        self.data.extend(other.data);
    }

    pub fn passed(&self) -> bool {
        !self.assertions.is_empty() && self.assertions.iter().all(|a| a.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultEnvelope {
    pub command: String,
    /// SHA-256 over the command, the effective configuration and any extra inputs.
    pub config_digest: String,
    pub values: Vec<Measured>,
    pub assertions: Vec<Assertion>,
    pub pass: bool,
    pub series: BTreeMap<String, Vec<Point>>,
    #[serde(default)]
    pub data: serde_json::Map<String, serde_json::Value>,
    pub wall_time_s: f64,
}

impl ResultEnvelope {
    pub fn new(command: &str, digest: String, report: &Report, wall_time_s: f64) -> Self {
        ResultEnvelope {
            command: command.to_string(),
            config_digest: digest,
            values: report.values.clone(),
            assertions: report.assertions.clone(),
            pass: report.passed(),
            series: report.series.clone(),
            data: report.data.clone(),
            wall_time_s,
        }
    }
}

pub fn config_digest(command: &str, cfg: &Config, extra: &str) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    h.update(serde_json::to_vec(cfg).expect("config serializes"));
    h.update([0]);
    h.update(extra.as_bytes());
    hex::encode(h.finalize())
}

/// Shortest text that round-trips the `f64` exactly, in scientific notation.
pub fn sci(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_table(dir: &std::path::Path, t: &Table) -> std::io::Result<std::path::PathBuf> {
    let path = dir.join(&t.file);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(&t.header)?;
    for r in &t.rows {
        w.write_record(r.iter().map(|v| sci(*v)))?;
    }
    w.flush()?;
    Ok(path)
}
