//! Reading pmfs and joint pmfs from JSON, CSV and generator specs.
//!
//! JSON: `{"probs": [...]}` or `{"matrix": [[...], ...]}` (rows indexed by
//! `y`). CSV: one probability per line, or a rectangular table for joints.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::{generate, Generator, JointPmf, Pmf};

#[derive(Debug, Serialize, Deserialize)]
pub struct PmfDoc {
    pub probs: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct JointDoc {
    pub matrix: Vec<Vec<f64>>,
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn read_csv_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Input(e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| Error::Input(format!("not a number: '{f}'"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn pmf_from_json(text: &str) -> Result<Pmf> {
    let doc: PmfDoc = serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))?;
    Pmf::new(&doc.probs)
}

pub fn pmf_from_csv(text: &str) -> Result<Pmf> {
    let rows = read_csv_rows(text)?;
    if rows.iter().any(|r| r.len() != 1) {
        return Err(Error::Input("pmf CSV needs exactly one probability per line".into()));
    }
    Pmf::new(&rows.into_iter().flatten().collect::<Vec<_>>())
}

pub fn joint_from_json(text: &str) -> Result<JointPmf> {
    let doc: JointDoc = serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))?;
    JointPmf::new(doc.matrix)
}

pub fn joint_from_csv(text: &str) -> Result<JointPmf> {
    JointPmf::new(read_csv_rows(text)?)
}

pub fn read_pmf(path: &Path) -> Result<Pmf> {
    let text = read_text(path)?;
    if is_json(path) {
        pmf_from_json(&text)
    } else {
        pmf_from_csv(&text)
    }
}

pub fn read_joint(path: &Path) -> Result<JointPmf> {
    let text = read_text(path)?;
    if is_json(path) {
        joint_from_json(&text)
    } else {
        joint_from_csv(&text)
    }
}

/// Resolves `file:PATH` or a generator spec such as `dyadic:10`.
pub fn pmf_source(spec: &str) -> Result<Pmf> {
    match spec.strip_prefix("file:") {
        Some(path) => read_pmf(Path::new(path)),
        None => generate(spec.parse::<Generator>()?),
    }
}

/// Resolves `file:PATH` or `randjoint:NY:NX:SEED`.
pub fn joint_source(spec: &str) -> Result<JointPmf> {
    if let Some(path) = spec.strip_prefix("file:") {
        return read_joint(Path::new(path));
    }
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::BadParameter(format!("unrecognized joint spec '{spec}'"));
    match parts.as_slice() {
        ["randjoint", ny, nx, seed] => JointPmf::random(
            ny.parse().map_err(|_| bad())?,
            nx.parse().map_err(|_| bad())?,
            seed.parse().map_err(|_| bad())?,
        ),
        _ => Err(bad()),
    }
}

pub fn pmf_to_json(p: &Pmf) -> String {
    serde_json::to_string(&PmfDoc { probs: p.probs().to_vec() }).expect("plain floats serialize")
}
