//! Report emission: canonical JSON with sorted keys, or CSV rows.

use std::fmt::Write as _;
use std::path::Path;

use regge_core::functional::TermValue;

use crate::Failure;

/// One CSV row of a per-polytope report.
pub struct Row {
    pub id: usize,
    pub dim: usize,
    pub term: &'static str,
    pub value: f64,
}

pub fn rows(terms: &[TermValue], dim: usize, term: &'static str) -> Vec<Row> {
    terms
        .iter()
        .map(|t| Row {
            id: t.id,
            dim,
            term,
            value: t.value,
        })
        .collect()
}

/// Convert a library report into a JSON value.
pub fn value<T: serde::Serialize>(report: &T) -> Result<serde_json::Value, Failure> {
    serde_json::to_value(report).map_err(|e| Failure::Input(format!("cannot encode report: {e}")))
}

/// `serde_json::Value` objects keep keys sorted, so the text is canonical.
pub fn json(v: &serde_json::Value) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure::Input(format!("cannot encode report: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn csv(rows: &[Row]) -> String {
    let mut s = String::from("polytope_id,dim,term,value\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{:e}", r.id, r.dim, r.term, r.value);
    }
    s
}

pub fn write(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
