//! Machine-readable run output shared by every CLI command.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One reported number. Absent fields are serialised as explicit `null`s
/// so every row has the same shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub name: String,
    pub value: f64,
    pub std_err: Option<f64>,
    pub reference: Option<f64>,
    pub abs_diff: Option<f64>,
    /// Quadrature error estimate, for oracle values.
    pub error_estimate: Option<f64>,
    /// `|value - reference| / std_err`; `null` when undefined or infinite.
    pub sigma_distance: Option<f64>,
    pub tolerance: Option<f64>,
    pub passed: Option<bool>,
}

impl ResultRow {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        ResultRow {
            name: name.into(),
            value,
            std_err: None,
            reference: None,
            abs_diff: None,
            error_estimate: None,
            sigma_distance: None,
            tolerance: None,
            passed: None,
        }
    }

    pub fn with_reference(mut self, reference: f64) -> Self {
        self.reference = Some(reference);
        self.abs_diff = Some((self.value - reference).abs());
        self.update_sigma();
        self
    }

    pub fn with_std_err(mut self, std_err: f64) -> Self {
        self.std_err = Some(std_err);
        self.update_sigma();
        self
    }

    pub fn with_error_estimate(mut self, estimate: f64) -> Self {
        self.error_estimate = Some(estimate);
        self
    }

    /// Marks the row as a check: passes iff `abs_diff <= tolerance`.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = Some(tolerance);
        self.passed = self.abs_diff.map(|d| d <= tolerance);
        self
    }

    /// Marks the row as a statistical check: passes iff within `sigmas`
    /// standard errors of the reference.
    pub fn with_sigma_gate(mut self, sigmas: f64) -> Self {
        self.tolerance = self.std_err.map(|s| sigmas * s);
        self.passed = match (self.abs_diff, self.tolerance) {
            (Some(d), Some(t)) => Some(d <= t),
            _ => None,
        };
        self
    }

    fn update_sigma(&mut self) {
        self.sigma_distance = match (self.abs_diff, self.std_err) {
            (Some(0.0), Some(_)) => Some(0.0),
            (Some(d), Some(s)) if s > 0.0 => Some(d / s),
            _ => None,
        };
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub results: Vec<ResultRow>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

impl RunRecord {
    pub fn new(command: &str) -> Self {
        RunRecord {
            command: command.to_string(),
            params: BTreeMap::new(),
            results: Vec::new(),
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            elapsed_ms: 0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn push(&mut self, row: ResultRow) -> &mut Self {
        self.results.push(row);
        self
    }

    /// False iff some row is a failed check.
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed != Some(false))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run records always serialise")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.to_json() + "\n",
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Table => self.to_table(),
        }
    }

    fn cells(row: &ResultRow) -> [String; 9] {
        let num = |v: Option<f64>| v.map(sig12).unwrap_or_default();
        [
            row.name.clone(),
            sig12(row.value),
            num(row.std_err),
            num(row.reference),
            num(row.abs_diff),
            num(row.error_estimate),
            num(row.sigma_distance),
            num(row.tolerance),
            match row.passed {
                Some(true) => "pass".into(),
                Some(false) => "FAIL".into(),
                None => String::new(),
            },
        ]
    }

    const COLUMNS: [&'static str; 9] =
        ["name", "value", "std_err", "reference", "abs_diff", "error_est", "sigma", "tolerance", "status"];

    fn to_csv(&self) -> String {
        let mut out = Self::COLUMNS.join(",") + "\n";
        for row in &self.results {
            let cells = Self::cells(row);
            let quoted: Vec<String> = cells
                .iter()
                .map(|c| if c.contains([',', '"']) { format!("\"{}\"", c.replace('"', "\"\"")) } else { c.clone() })
                .collect();
            out += &(quoted.join(",") + "\n");
        }
        out
    }

    fn to_table(&self) -> String {
        let mut out = format!("{} (bures {})\n", self.command, self.tool_version);
        for (k, v) in &self.params {
            let shown = match v {
                Value::Number(n) => n.as_f64().map(sig12).unwrap_or_else(|| n.to_string()),
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            let _ = writeln!(out, "  {k} = {shown}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "  seed = {seed}");
        }
        // drop columns that are empty in every row
        let rows: Vec<[String; 9]> = self.results.iter().map(Self::cells).collect();
        let keep: Vec<usize> = (0..9).filter(|&c| c < 2 || rows.iter().any(|r| !r[c].is_empty())).collect();
        let widths: Vec<usize> = keep
            .iter()
            .map(|&c| rows.iter().map(|r| r[c].chars().count()).chain([Self::COLUMNS[c].len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: Vec<&str>| {
            let mut s = String::new();
            for (cell, w) in cells.iter().zip(&widths) {
                let _ = write!(s, "{cell:<w$}  ");
            }
            s.trim_end().to_string() + "\n"
        };
        out.push('\n');
        out += &line(keep.iter().map(|&c| Self::COLUMNS[c]).collect());
        for r in &rows {
            out += &line(keep.iter().map(|&c| r[c].as_str()).collect());
        }
        out
    }
}

/// `v` with 12 significant digits, trailing zeros dropped (like C's `%.12g`).
pub fn sig12(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{v:.decimals$}");
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let m = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{m}e{exp}")
    }
}
