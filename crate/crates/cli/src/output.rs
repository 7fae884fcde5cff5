//! JSON and CSV rendering.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use clap::ValueEnum;
use serde::Serialize;

use crate::verify::VerifyReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Shortest round-trip representation, so CSV values parse back bit-exact.
fn number(x: f64) -> String {
    format!("{x:?}")
}

pub fn table_csv(columns: &[&str], rows: &[Vec<f64>]) -> Result<String> {
    let mut out = columns.join(",");
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        if row.len() != columns.len() {
            bail!("row {i} has {} values for {} columns", row.len(), columns.len());
        }
        let cells: Vec<String> = row.iter().map(|x| number(*x)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(out)
}

pub fn verify_csv(report: &VerifyReport) -> String {
    let mut out = String::from("name,cases,measured,tolerance,passed\n");
    for r in &report.invariants {
        let _ = writeln!(out, "{},{},{},{},{}", r.name, r.cases, number(r.measured), number(r.tolerance), r.passed);
    }
    out
}

/// `key,value` rows for a flat JSON object.
pub fn object_csv(value: &serde_json::Value) -> Result<String> {
    let Some(map) = value.as_object() else { bail!("payload is not an object") };
    let mut out = String::from("key,value\n");
    for (k, v) in map {
        match v {
            serde_json::Value::Number(n) => writeln!(out, "{k},{}", number(n.as_f64().unwrap_or(f64::NAN)))?,
            serde_json::Value::String(s) => writeln!(out, "{k},{s}")?,
            serde_json::Value::Bool(b) => writeln!(out, "{k},{b}")?,
            serde_json::Value::Null => writeln!(out, "{k},")?,
            _ => bail!("field `{k}` is not a scalar"),
        }
    }
    Ok(out)
}
