//! Serialization of verification reports.
//!
//! JSON layout (`schema` is `ladderlattice-report/1`):
//!
//! ```text
//! {
//!   "schema": "ladderlattice-report/1",
//!   "summary": { "total", "passed", "failed", "skipped" },
//!   "environment": { "precision_bits", "precision_digits", "float_tolerance",
//!                    "limit_tolerance", "truncation_bound", "seed" },
//!   "cells": [ { "identity", "family", "params": {name: value}, "m", "n", "field",
//!                "max_residual", "tolerance", "status", "note" } ]
//! }
//! ```
//!
//! Residuals and tolerances are strings: exact fractions in the rational field, shortest
//! round-trip decimals otherwise. CSV has one row per cell with the columns of [`CSV_COLUMNS`].

use ladderlattice_core::verify::{Cell, Report};
use serde_json::{json, Map, Value};

pub const SCHEMA: &str = "ladderlattice-report/1";

pub const CSV_COLUMNS: [&str; 10] =
    ["identity", "family", "params", "m", "n", "field", "max_residual", "tolerance", "status", "note"];

fn cell_json(c: &Cell) -> Value {
    let params: Map<String, Value> = c.params.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
    json!({
        "identity": c.identity,
        "family": c.family,
        "params": params,
        "m": c.m,
        "n": c.n,
        "field": c.field,
        "max_residual": c.max_residual,
        "tolerance": c.tolerance,
        "status": c.status.as_str(),
        "note": c.note,
    })
}

pub fn to_json(r: &Report) -> Value {
    let e = &r.environment;
    json!({
        "schema": SCHEMA,
        "summary": {
            "total": r.summary.total,
            "passed": r.summary.passed,
            "failed": r.summary.failed,
            "skipped": r.summary.skipped,
        },
        "environment": {
            "precision_bits": e.precision_bits,
            "precision_digits": e.precision_digits,
            "float_tolerance": e.float_tolerance,
            "limit_tolerance": e.limit_tolerance,
            "truncation_bound": e.truncation_bound,
            "seed": e.seed,
        },
        "cells": r.cells.iter().map(cell_json).collect::<Vec<_>>(),
    })
}

fn params_field(c: &Cell) -> String {
    c.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

pub fn to_csv(r: &Report) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for c in &r.cells {
        let (m, n) = (c.m.to_string(), c.n.to_string());
        let params = params_field(c);
        let note = c.note.clone().unwrap_or_default();
        w.write_record([
            c.identity.as_str(),
            &c.family,
            &params,
            &m,
            &n,
            &c.field,
            &c.max_residual,
            &c.tolerance,
            c.status.as_str(),
            &note,
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// One line per failing or skipped cell, then the summary.
pub fn to_plain(r: &Report) -> String {
    let mut out = String::new();
    for c in r.cells.iter().filter(|c| c.status.as_str() != "pass") {
        out.push_str(&format!(
            "{:<7} {:<20} {:<10} m={} n={} {} residual={}",
            c.status.as_str(),
            c.identity,
            c.family,
            c.m,
            c.n,
            c.field,
            c.max_residual
        ));
        if let Some(note) = &c.note {
            out.push_str(&format!("  ({note})"));
        }
        out.push('\n');
    }
    let s = &r.summary;
    out.push_str(&format!(
        "{} cells: {} passed, {} failed, {} skipped\n",
        s.total, s.passed, s.failed, s.skipped
    ));
    out
}
