//! CSV tables, the JSON summary and the all-or-nothing output directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub const SUMMARY_SCHEMA: &str = "hotline.summary/1";
pub const SUMMARY_FILE: &str = "summary.json";

/// Shortest round-trip digits; scientific outside [1e-4, 1e15) so tiny
/// residuals stay readable.
fn fmt_f64(out: &mut String, v: f64) {
    let a = v.abs();
    let _ = if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) { write!(out, "{v}") } else { write!(out, "{v:e}") };
}

/// Comma-separated table with a mandatory header. Equal numbers always print the same
/// bytes.
#[derive(Clone, Debug)]
pub struct Table {
    header: Vec<String>,
    body: String,
}

pub enum Cell {
    F(f64),
    U(u64),
    S(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::U(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::U(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self { header: header.iter().map(|h| h.as_ref().to_string()).collect(), body: String::new() }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.header.len(), "row width differs from header");
        let mut first = true;
        for c in cells {
            if !first {
                self.body.push(',');
            }
            first = false;
            match c {
                Cell::F(v) => fmt_f64(&mut self.body, v),
                Cell::U(v) => {
                    let _ = write!(self.body, "{v}");
                }
                Cell::S(s) => {
                    debug_assert!(!s.contains([',', '\n', '"']));
                    self.body.push_str(&s);
                }
            }
        }
        self.body.push('\n');
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        s.push_str(&self.body);
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance condition, e.g. "≤ 1e-10".
    pub threshold: String,
    pub passed: bool,
}

/// Everything a run produces, held in memory until it is written in one go.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: BTreeMap<String, String>,
    pub derived: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl Artifacts {
    pub fn table(&mut self, name: &str, t: &Table) {
        self.file(name, t.render());
    }

    pub fn file(&mut self, name: &str, text: String) {
        let old = self.files.insert(name.to_string(), text);
        assert!(old.is_none(), "output file {name} written twice");
    }

    pub fn derive(&mut self, key: &str, v: impl Serialize) {
        let v = serde_json::to_value(v).unwrap_or(Value::Null);
        self.derived.insert(key.to_string(), v);
    }

    pub fn check_le(&mut self, name: &str, value: f64, max: f64) {
        self.checks.push(Check { name: name.into(), value, threshold: format!("≤ {max:e}"), passed: value <= max });
    }

    pub fn check_ge(&mut self, name: &str, value: f64, min: f64) {
        self.checks.push(Check { name: name.into(), value, threshold: format!("≥ {min:e}"), passed: value >= min });
    }

    pub fn check_in(&mut self, name: &str, value: f64, lo: f64, hi: f64) {
        self.checks.push(Check {
            name: name.into(),
            value,
            threshold: format!("in [{lo:e}, {hi:e}]"),
            passed: (lo..=hi).contains(&value),
        });
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    schema: &'static str,
    name: &'a str,
    kind: &'a str,
    seed: u64,
    inputs: &'a Value,
    derived: &'a BTreeMap<String, Value>,
    checks: &'a [Check],
    warnings: &'a [String],
    files: Vec<&'a str>,
    passed: bool,
}

pub fn summary_json(name: &str, kind: &str, seed: u64, inputs: &Value, a: &Artifacts) -> String {
    let s = Summary {
        schema: SUMMARY_SCHEMA,
        name,
        kind,
        seed,
        inputs,
        derived: &a.derived,
        checks: &a.checks,
        warnings: &a.warnings,
        files: a.files.keys().map(String::as_str).collect(),
        passed: a.checks.iter().all(|c| c.passed),
    };
    let mut out = serde_json::to_string_pretty(&s).expect("summary serializes");
    out.push('\n');
    out
}

/// Writes every file into a sibling staging directory and renames it into
/// place, so the target either holds a complete result set or is untouched.
pub fn write_atomically(dir: &Path, files: &BTreeMap<String, String>) -> Result<(), CliError> {
    let parent = match dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent)?;
    let leaf = dir.file_name().ok_or_else(|| CliError::Io(format!("bad output directory {}", dir.display())))?;
    let staging = parent.join(format!(".{}.partial-{}", leaf.to_string_lossy(), std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    fs::create_dir(&staging)?;
    let result = (|| {
        for (name, text) in files {
            fs::write(staging.join(name), text)?;
        }
        if dir.exists() {
            fs::remove_dir_all(dir)?;
        }
        fs::rename(&staging, dir)
    })();
    if result.is_err() {
        let _ = fs::remove_dir_all(&staging);
    }
    result.map_err(CliError::from)
}
