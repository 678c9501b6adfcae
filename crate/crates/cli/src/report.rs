//! Tabular command output rendered as text, CSV or JSON.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// One command's output: parameters, a result table with fixed columns, and
/// free-form diagnostics.
#[derive(Debug)]
pub struct Report {
    pub command: &'static str,
    pub params: Map<String, Value>,
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Value>>,
    pub diagnostics: Map<String, Value>,
}

impl Report {
    pub fn new(command: &'static str, columns: &'static [&'static str]) -> Self {
        Self { command, params: Map::new(), columns, rows: Vec::new(), diagnostics: Map::new() }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.params.insert(key.into(), value.into());
        self
    }

    pub fn diag(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.diagnostics.insert(key.into(), value.into());
        self
    }

    pub fn row(&mut self, cells: Vec<Value>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.json(),
            Format::Csv => self.csv(),
            Format::Text => self.text(),
        }
    }

    fn json(&self) -> String {
        let results: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect()))
            .collect();
        let doc = json!({
            "command": self.command,
            "params": self.params,
            "results": results,
            "diagnostics": self.diagnostics,
        });
        let mut out = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
        out.push('\n');
        out
    }

    fn csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.command);
        for (k, v) in &self.params {
            let _ = writeln!(out, "  {k} = {}", plain(v));
        }
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(plain).collect()).collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|j| cells.iter().map(|r| r[j].len()).chain([self.columns[j].len()]).max().unwrap_or(0))
            .collect();
        let line = |items: Vec<&str>| {
            let padded: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
            padded.join("  ").trim_end().to_string()
        };
        out.push('\n');
        let _ = writeln!(out, "{}", line(self.columns.to_vec()));
        for r in &cells {
            let _ = writeln!(out, "{}", line(r.iter().map(String::as_str).collect()));
        }
        if !self.diagnostics.is_empty() {
            out.push('\n');
            for (k, v) in &self.diagnostics {
                match v {
                    Value::Array(items) => {
                        let _ = writeln!(out, "{k}:");
                        for item in items {
                            let _ = writeln!(out, "  - {}", plain(item));
                        }
                    }
                    _ => {
                        let _ = writeln!(out, "{k}: {}", plain(v));
                    }
                }
            }
        }
        out
    }
}

/// A JSON number, or `null` for NaN and infinities.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

fn plain(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
