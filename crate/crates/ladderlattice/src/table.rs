//! Tabulated samples and their CSV form.
//!
//! Table columns are `s, x, v, omega`; ladder columns are `s, x, before, after, target`. Values
//! are written with [`Scalar::render`] (exact fractions or shortest round-trip decimals), so
//! reading a table back with [`read_table`] in the same field reproduces every value exactly.

use ladderlattice_core::{parse_rational, parse_scalar, Real, Scalar};

use crate::compute::{LadderRow, Point};

pub const TABLE_COLUMNS: [&str; 4] = ["s", "x", "v", "omega"];
pub const LADDER_COLUMNS: [&str; 5] = ["s", "x", "before", "after", "target"];

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow<S> {
    pub point: Point,
    pub x: S,
    pub v: S,
    pub omega: Option<Real>,
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn write_table<S: Scalar>(rows: &[TableRow<S>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TABLE_COLUMNS).expect("in-memory write");
    for r in rows {
        let om = r.omega.as_ref().map(Scalar::render).unwrap_or_default();
        w.write_record([r.point.to_string(), r.x.render(), r.v.render(), om]).expect("in-memory write");
    }
    finish(w)
}

pub fn write_ladder<S: Scalar>(rows: &[LadderRow<S>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(LADDER_COLUMNS).expect("in-memory write");
    for r in rows {
        w.write_record([r.point.to_string(), r.x.render(), r.before.render(), r.after.render(), r.target.render()])
            .expect("in-memory write");
    }
    finish(w)
}

/// Reads a table written by [`write_table`].
pub fn read_table<S: Scalar>(text: &str) -> Result<Vec<TableRow<S>>, String> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().collect::<Vec<_>>() != TABLE_COLUMNS {
        return Err(format!("expected columns {TABLE_COLUMNS:?}"));
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let bad = |col: &str| format!("row {}: unreadable {col}", i + 1);
        let point = parse_rational(&rec[0]).ok_or_else(|| bad("s"))?;
        let x = parse_scalar::<S>(&rec[1]).ok_or_else(|| bad("x"))?;
        let v = parse_scalar::<S>(&rec[2]).ok_or_else(|| bad("v"))?;
        let omega = match &rec[3] {
            "" => None,
            t => Some(parse_scalar::<Real>(t).ok_or_else(|| bad("omega"))?),
        };
        out.push(TableRow { point, x, v, omega });
    }
    Ok(out)
}
