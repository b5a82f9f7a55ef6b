//! Rendering of command results as CSV, JSON or plain text.

use std::fmt::Write as _;

use clap::ValueEnum;
use poussin::Dd;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    #[default]
    Text,
}

/// One output cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Text(String),
    /// A float with its printed decimal form.
    Float(f64, String),
    Int(u64),
    Bool(bool),
    Missing,
}

impl Value {
    /// `x` at ten significant digits.
    pub fn sig10(x: Dd) -> Value {
        let text = x.to_sig_string(10);
        Value::Float(text.parse().unwrap_or(f64::NAN), text)
    }

    pub fn float(x: f64) -> Value {
        if x.is_finite() {
            Value::Float(x, format!("{x:e}"))
        } else {
            Value::Text(x.to_string())
        }
    }

    pub fn opt_float(x: Option<f64>) -> Value {
        x.map_or(Value::Missing, Value::float)
    }

    fn cell(&self) -> String {
        match self {
            Value::Text(s) | Value::Float(_, s) => s.clone(),
            Value::Int(n) => n.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Missing => String::new(),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Text(t) => s.serialize_str(t),
            Value::Float(x, _) => s.serialize_f64(*x),
            Value::Int(n) => s.serialize_u64(*n),
            Value::Bool(b) => s.serialize_bool(*b),
            Value::Missing => s.serialize_none(),
        }
    }
}

/// Named cells in output order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Record(pub Vec<(&'static str, Value)>);

impl Record {
    pub fn new() -> Record {
        Record::default()
    }

    pub fn with(mut self, key: &'static str, value: Value) -> Record {
        self.0.push((key, value));
        self
    }

    pub fn text(self, key: &'static str, value: impl Into<String>) -> Record {
        self.with(key, Value::Text(value.into()))
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

/// A command result: a single record, or a table of records sharing keys.
#[derive(Clone, Debug, PartialEq)]
pub enum Report {
    Single(Record),
    Table(Vec<Record>),
}

impl Report {
    fn rows(&self) -> &[Record] {
        match self {
            Report::Single(r) => std::slice::from_ref(r),
            Report::Table(rows) => rows,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => {
                let mut out = match self {
                    Report::Single(r) => serde_json::to_string_pretty(r),
                    Report::Table(rows) => serde_json::to_string_pretty(rows),
                }
                .expect("records serialize");
                out.push('\n');
                out
            }
            Format::Text => self.text(),
        }
    }

    fn csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        if let Some(first) = self.rows().first() {
            w.write_record(first.0.iter().map(|(k, _)| *k))
                .expect("in-memory write");
        }
        for row in self.rows() {
            w.write_record(row.0.iter().map(|(_, v)| v.cell()))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    fn text(&self) -> String {
        let mut out = String::new();
        match self {
            Report::Single(r) => {
                let width = r.0.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                for (k, v) in &r.0 {
                    let _ = writeln!(out, "{k:<width$}  {}", v.cell());
                }
            }
            Report::Table(rows) => {
                let Some(first) = rows.first() else {
                    return out;
                };
                let keys: Vec<&str> = first.0.iter().map(|(k, _)| *k).collect();
                let cells: Vec<Vec<String>> = rows
                    .iter()
                    .map(|r| r.0.iter().map(|(_, v)| v.cell()).collect())
                    .collect();
                let widths: Vec<usize> = (0..keys.len())
                    .map(|i| {
                        cells
                            .iter()
                            .map(|c| c[i].len())
                            .chain([keys[i].len()])
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                let line = |items: &[&str]| {
                    let padded: Vec<String> = items
                        .iter()
                        .zip(&widths)
                        .map(|(s, w)| format!("{s:<w$}"))
                        .collect();
                    padded.join("  ").trim_end().to_owned() + "\n"
                };
                out += &line(&keys);
                for c in &cells {
                    out += &line(&c.iter().map(String::as_str).collect::<Vec<_>>());
                }
            }
        }
        out
    }
}
