use std::fmt::Display;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub description: String,
    pub expected: String,
    pub measured: String,
    /// `None` for exact comparisons.
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub anchor: String,
}

impl CheckRecord {
    pub fn exact<T: Display + PartialEq>(id: &str, description: &str, expected: T, measured: T, anchor: &str) -> Self {
        CheckRecord {
            id: id.into(),
            description: description.into(),
            pass: expected == measured,
            expected: expected.to_string(),
            measured: measured.to_string(),
            tolerance: None,
            anchor: anchor.into(),
        }
    }

    /// Passes when `|measured − expected| ≤ tolerance`; NaN fails.
    pub fn close(id: &str, description: &str, expected: f64, measured: f64, tolerance: f64, anchor: &str) -> Self {
        CheckRecord {
            id: id.into(),
            description: description.into(),
            expected: fmt_f64(expected),
            measured: fmt_f64(measured),
            tolerance: Some(tolerance),
            pass: (measured - expected).abs() <= tolerance,
            anchor: anchor.into(),
        }
    }

    /// Passes when `measured < bound`.
    pub fn below(id: &str, description: &str, measured: f64, bound: f64, anchor: &str) -> Self {
        CheckRecord {
            id: id.into(),
            description: description.into(),
            expected: format!("< {}", fmt_f64(bound)),
            measured: fmt_f64(measured),
            tolerance: Some(bound),
            pass: measured < bound,
            anchor: anchor.into(),
        }
    }

    pub fn flag(id: &str, description: &str, pass: bool, measured: impl Into<String>, anchor: &str) -> Self {
        CheckRecord {
            id: id.into(),
            description: description.into(),
            expected: "true".into(),
            measured: measured.into(),
            tolerance: None,
            pass,
            anchor: anchor.into(),
        }
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.6e}")
}

#[derive(Debug, Serialize)]
pub struct RunReport<C: Serialize> {
    pub schema: u32,
    pub suite: String,
    pub pass: bool,
    pub config: C,
    pub checks: Vec<CheckRecord>,
}

impl<C: Serialize> RunReport<C> {
    pub fn new(suite: &str, config: C, checks: Vec<CheckRecord>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        RunReport { schema: SCHEMA, suite: suite.into(), pass, config, checks }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
        w.write_record(["suite", "id", "description", "expected", "measured", "tolerance", "pass", "anchor"])?;
        for c in &self.checks {
            let tol = c.tolerance.map(fmt_f64).unwrap_or_default();
            w.write_record([
                self.suite.as_str(),
                &c.id,
                &c.description,
                &c.expected,
                &c.measured,
                &tol,
                if c.pass { "true" } else { "false" },
                &c.anchor,
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// JSON unless the path ends in `.csv`.
    pub fn write(&self, path: &Path) -> Result<()> {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            self.write_csv(path)
        } else {
            std::fs::write(path, self.to_json()?).with_context(|| format!("cannot write {}", path.display()))
        }
    }
}

pub fn write_table<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
