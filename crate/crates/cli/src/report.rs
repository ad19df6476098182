//! Tabular results with a self-describing header, rendered as CSV or JSON.

use std::io::Write;

use anyhow::Result;
use serde_json::{json, Map, Value};

use crate::settings::{Format, Resolved};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // shortest round-trip representation; byte-stable across runs
            // adding zero folds -0 into 0
            Cell::Num(x) if *x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&x.abs()) => format!("{}", x + 0.0),
            Cell::Num(x) => format!("{x:e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

pub struct Report {
    pub command: &'static str,
    pub config: Resolved,
    /// Ordered key/value diagnostics (winding counts, depths, maxima).
    pub diagnostics: Vec<(String, Cell)>,
    pub warnings: Vec<String>,
    /// Threshold violations; any entry makes the exit code nonzero.
    pub failures: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(command: &'static str, config: &Resolved, columns: Vec<&'static str>) -> Self {
        Report {
            command,
            config: config.clone(),
            diagnostics: Vec::new(),
            warnings: Vec::new(),
            failures: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn diag(&mut self, key: &str, value: impl Into<Cell>) {
        self.diagnostics.push((key.to_string(), value.into()));
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }

    fn csv(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        writeln!(out, "# tricf {}", self.command)?;
        for line in self.config.to_toml().lines() {
            writeln!(out, "# {line}")?;
        }
        for (k, v) in &self.diagnostics {
            writeln!(out, "# diagnostic {k} = {}", v.csv())?;
        }
        for w in &self.warnings {
            writeln!(out, "# warning {w}")?;
        }
        for f in &self.failures {
            writeln!(out, "# failure {f}")?;
        }
        writeln!(out, "# status {}", if self.passed() { "pass" } else { "fail" })?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }

    fn json(&self) -> Result<Vec<u8>> {
        let diagnostics: Map<String, Value> = self.diagnostics.iter().map(|(k, v)| (k.clone(), v.json())).collect();
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
        let doc = json!({
            "command": self.command,
            "config": self.config,
            "diagnostics": diagnostics,
            "warnings": self.warnings,
            "failures": self.failures,
            "status": if self.passed() { "pass" } else { "fail" },
            "columns": self.columns,
            "rows": rows,
        });
        let mut out = serde_json::to_vec_pretty(&doc)?;
        out.push(b'\n');
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::settings::Settings;

    fn sample() -> Report {
        let cfg = Settings::default().resolve().unwrap();
        let mut r = Report::new("spectrum", &cfg, vec!["re", "note"]);
        r.diag("winding_count", 3i64);
        r.row(vec![0.5.into(), "a,b".into()]);
        r.row(vec![f64::NAN.into(), "x".into()]);
        r
    }

    #[test]
    fn csv_header_carries_the_config() {
        let text = String::from_utf8(sample().render(Format::Csv).unwrap()).unwrap();
        assert!(text.starts_with("# tricf spectrum\n# model = \"bose-hubbard\"\n"));
        assert!(text.contains("# diagnostic winding_count = 3\n"));
        assert!(text.contains("re,note\n0.5,\"a,b\"\nNaN,x\n"));
    }

    #[test]
    fn json_maps_nan_to_null() {
        let doc: Value = serde_json::from_slice(&sample().render(Format::Json).unwrap()).unwrap();
        assert_eq!(doc["rows"][1][0], Value::Null);
        assert_eq!(doc["config"]["n_bosons"], json!(2));
        assert_eq!(doc["status"], json!("pass"));
    }
}
