//! Deterministic CSV and JSON rendering.
//!
//! CSV cells carry a fixed number of decimals; JSON numbers are rounded to
//! the same number of significant digits and objects are emitted with
//! sorted keys. Non-finite values become the strings `inf`, `-inf`, `nan`.

use std::fs;
use std::path::Path;

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Float)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn non_finite(v: f64) -> Option<&'static str> {
    if v.is_nan() {
        Some("nan")
    } else if v == f64::INFINITY {
        Some("inf")
    } else if v == f64::NEG_INFINITY {
        Some("-inf")
    } else {
        None
    }
}

pub fn format_decimal(v: f64, precision: usize) -> String {
    if let Some(s) = non_finite(v) {
        return s.to_string();
    }
    let s = format!("{v:.precision$}");
    // "-0.000" would make the sign depend on rounding noise.
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_csv(table: &Table, precision: usize) -> String {
    let mut out = String::new();
    out.push_str(&table.columns.iter().map(|c| quote(c)).collect::<Vec<_>>().join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Int(i) => i.to_string(),
                Cell::Float(v) => format_decimal(*v, precision),
                Cell::Text(s) => quote(s),
                Cell::Missing => String::new(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// A JSON number, or the sentinel string for a non-finite value.
pub fn json_f64(v: f64) -> Value {
    match non_finite(v) {
        Some(s) => Value::String(s.to_string()),
        None => Value::from(v),
    }
}

pub fn json_opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, json_f64)
}

pub fn json_vec(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| json_f64(*x)).collect())
}

fn round_significant(v: f64, digits: usize) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let digits = digits.clamp(1, 17);
    format!("{:.*e}", digits - 1, v).parse().unwrap_or(v)
}

fn canonical(value: &Value, precision: usize) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let v = n.as_f64().unwrap_or(f64::NAN);
            let r = round_significant(v, precision);
            serde_json::Number::from_f64(r).map_or_else(|| json_f64(r), Value::Number)
        }
        Value::Array(items) => Value::Array(items.iter().map(|v| canonical(v, precision)).collect()),
        Value::Object(map) => {
            // serde_json's default map is ordered by key.
            let sorted: Map<String, Value> = map.iter().map(|(k, v)| (k.clone(), canonical(v, precision))).collect();
            Value::Object(sorted)
        }
        other => other.clone(),
    }
}

pub fn render_json(value: &Value, precision: usize) -> String {
    let mut s = serde_json::to_string_pretty(&canonical(value, precision)).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| CliError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn emit_csv(table: &Table, path: &Path, precision: usize) -> Result<()> {
    write_file(path, &render_csv(table, precision))
}

pub fn emit_json(value: &Value, path: &Path, precision: usize) -> Result<()> {
    write_file(path, &render_json(value, precision))
}
