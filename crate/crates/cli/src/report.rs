//! Tables rendered as CSV (plus `name: value` summary lines) or versioned JSON.
//!
//! Every real number is printed with 12 significant digits, so identical
//! inputs give byte-identical output.

use anyhow::Result;
use serde_json::{json, Map, Value};

use crate::config::OutputFormat;

pub const SCHEMA_VERSION: u32 = 1;

/// Separator between thresholds inside a single CSV field.
pub const THRESHOLD_SEPARATOR: &str = ";";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Reals(Vec<f64>),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => real(*v),
            Cell::Reals(vs) => vs
                .iter()
                .map(|v| real(*v))
                .collect::<Vec<_>>()
                .join(THRESHOLD_SEPARATOR),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Real(v) => rounded(*v),
            Cell::Reals(vs) => Value::Array(vs.iter().map(|v| rounded(*v)).collect()),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

/// 12 significant digits in scientific notation.
pub fn real(v: f64) -> String {
    format!("{v:.11e}")
}

/// Non-finite values have no JSON number form and become `null`.
fn rounded(v: f64) -> Value {
    let r: f64 = real(v).parse().unwrap_or(v);
    serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Row {
    Values(Vec<Cell>),
    /// A key (the first column) whose computation failed.
    Error {
        key: Cell,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Row>,
    pub summary: Vec<(&'static str, Cell)>,
}

impl Table {
    pub fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Self {
            command,
            columns,
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn has_errors(&self) -> bool {
        self.rows.iter().any(|r| matches!(r, Row::Error { .. }))
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => self.csv(),
            OutputFormat::Json => self.json(),
        }
    }

    /// Error rows keep the column count: the message goes in the second column.
    fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            let fields: Vec<String> = match row {
                Row::Values(cells) => cells.iter().map(Cell::csv).collect(),
                Row::Error { key, message } => {
                    let mut f = vec![String::new(); self.columns.len()];
                    f[0] = key.csv();
                    f[1] = format!("error: {message}");
                    f
                }
            };
            w.write_record(&fields)?;
        }
        let mut out = String::from_utf8(w.into_inner()?)?;
        for (name, value) in &self.summary {
            out.push_str(&format!("{name}: {}\n", value.csv()));
        }
        Ok(out)
    }

    fn json(&self) -> Result<String> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                match row {
                    Row::Values(cells) => {
                        for (name, cell) in self.columns.iter().zip(cells) {
                            obj.insert((*name).to_owned(), cell.json());
                        }
                    }
                    Row::Error { key, message } => {
                        obj.insert(self.columns[0].to_owned(), key.json());
                        obj.insert("error".to_owned(), json!(message));
                    }
                }
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("schema".to_owned(), json!(SCHEMA_VERSION));
        doc.insert("command".to_owned(), json!(self.command));
        doc.insert("columns".to_owned(), json!(self.columns));
        doc.insert("rows".to_owned(), Value::Array(rows));
        for (name, value) in &self.summary {
            doc.insert((*name).to_owned(), value.json());
        }
        let mut out = serde_json::to_string_pretty(&Value::Object(doc))?;
        out.push('\n');
        Ok(out)
    }
}
