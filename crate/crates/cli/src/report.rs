//! Output records and their JSON/CSV rendering. Every real number goes
//! through `g12`, so the printed digits are the comparison precision.

use std::io::Write;

use serde_json::{Map, Value};
use softguess::fmt::g12;

use crate::{Failure, Format, Output};

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Nums(Vec<f64>),
    Texts(Vec<String>),
    Records(Vec<Record>),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

fn num_json(x: f64) -> Value {
    g12(x)
        .parse::<f64>()
        .ok()
        .and_then(serde_json::Number::from_f64)
        .map_or_else(|| Value::String(g12(x)), Value::Number)
}

impl Cell {
    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => num_json(*x),
            Cell::Int(x) => Value::from(*x),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Nums(v) => Value::Array(v.iter().map(|x| num_json(*x)).collect()),
            Cell::Texts(v) => Value::Array(v.iter().map(|s| Value::from(s.as_str())).collect()),
            Cell::Records(v) => Value::Array(v.iter().map(Record::json).collect()),
        }
    }

    fn text(&self) -> String {
        match self {
            Cell::Num(x) => g12(*x),
            Cell::Int(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Nums(v) => v.iter().map(|x| g12(*x)).collect::<Vec<_>>().join(";"),
            Cell::Texts(v) => v.join(";"),
            Cell::Records(v) => v.len().to_string(),
        }
    }
}

/// An ordered list of named fields.
#[derive(Debug, Default, Clone)]
pub struct Record(pub Vec<(&'static str, Cell)>);

impl Record {
    pub fn put(&mut self, key: &'static str, value: impl Into<Cell>) -> &mut Self {
        self.0.push((key, value.into()));
        self
    }

    fn json(&self) -> Value {
        Value::Object(self.0.iter().map(|(k, v)| (k.to_string(), v.json())).collect::<Map<_, _>>())
    }
}

pub enum Report {
    Single(Record),
    Table(Vec<Record>),
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let v = match self {
                    Report::Single(r) => r.json(),
                    Report::Table(rows) => Value::Array(rows.iter().map(Record::json).collect()),
                };
                serde_json::to_string_pretty(&v).expect("json values serialize") + "\n"
            }
            Format::Csv => {
                let rows: &[Record] = match self {
                    Report::Single(r) => std::slice::from_ref(r),
                    Report::Table(rows) => rows,
                };
                let mut out = String::new();
                if let Some(first) = rows.first() {
                    out += &first.0.iter().map(|(k, _)| *k).collect::<Vec<_>>().join(",");
                    out.push('\n');
                }
                for r in rows {
                    out += &r.0.iter().map(|(_, v)| csv_field(&v.text())).collect::<Vec<_>>().join(",");
                    out.push('\n');
                }
                out
            }
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit(report: &Report, out: &Output, default: Format) -> Result<(), Failure> {
    let text = report.render(out.format.unwrap_or(default));
    match &out.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Usage(format!("cannot write to stdout: {e}")))
        }
    }
}
