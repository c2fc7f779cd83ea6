//! Report rendering: a flat list of named fields rendered either as an
//! aligned human-readable table or as stable `key=value` records, one per
//! line, for scripting. Numeric record values use a fixed 12-digit format so
//! repeated runs are byte-identical.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Output format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Records,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "records" => Ok(ReportFormat::Records),
            other => Err(Error::InvalidInput(format!(
                "unknown format \"{other}\" (expected \"table\" or \"records\")"
            ))),
        }
    }
}

/// Fixed-precision float for `records` output: plain decimal with 12 digits
/// after the point for ordinary magnitudes, scientific with the same digit
/// count outside them.
pub fn records_f64(x: f64) -> String {
    if x == 0.0 {
        return format!("{:.12}", 0.0);
    }
    let a = x.abs();
    if (1e-8..1e12).contains(&a) {
        format!("{x:.12}")
    } else {
        format!("{x:.12e}")
    }
}

#[derive(Debug, Clone)]
enum Value {
    Text(String),
    Float(f64),
    Int(u64),
    Bool(bool),
}

/// An ordered collection of report fields with a title.
#[derive(Debug, Clone)]
pub struct Report {
    title: String,
    fields: Vec<(String, Value)>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            fields: Vec::new(),
        }
    }

    pub fn text(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.fields.push((key.into(), Value::Text(value.into())));
        self
    }

    pub fn float(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.fields.push((key.into(), Value::Float(value)));
        self
    }

    pub fn int(&mut self, key: impl Into<String>, value: u64) -> &mut Self {
        self.fields.push((key.into(), Value::Int(value)));
        self
    }

    pub fn bool(&mut self, key: impl Into<String>, value: bool) -> &mut Self {
        self.fields.push((key.into(), Value::Bool(value)));
        self
    }

    /// One `1`-based indexed float per entry, e.g. `user_rate.1`.
    pub fn float_series(&mut self, key: &str, values: &[f64]) -> &mut Self {
        for (i, v) in values.iter().enumerate() {
            self.float(format!("{key}.{}", i + 1), *v);
        }
        self
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Records => self.render_records(),
            ReportFormat::Table => self.render_table(),
        }
    }

    fn render_records(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.fields {
            let rendered = match value {
                Value::Text(s) => s.clone(),
                Value::Float(x) => records_f64(*x),
                Value::Int(n) => n.to_string(),
                Value::Bool(b) => b.to_string(),
            };
            let _ = writeln!(out, "{key}={rendered}");
        }
        out
    }

    fn render_table(&self) -> String {
        let width = self
            .fields
            .iter()
            .map(|(k, _)| k.len())
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.title);
        let _ = writeln!(out, "{}", "-".repeat(self.title.len().max(4)));
        for (key, value) in &self.fields {
            let rendered = match value {
                Value::Text(s) => s.clone(),
                Value::Float(x) => format!("{x:.9}"),
                Value::Int(n) => n.to_string(),
                Value::Bool(b) => b.to_string(),
            };
            let _ = writeln!(out, "{key:width$}  {rendered}");
        }
        out
    }
}
