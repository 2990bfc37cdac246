//! CSV and JSON rendering of result rows.
//!
//! Reals are written with 17 significant digits (`{:.16e}`) so that every
//! value round-trips; non-finite bounds become `inf` in CSV and `null` in
//! JSON.

use std::io::Write;

use serde_json::{Map, Number, Value};

use crate::config::{short_label, Format};
use crate::scenario::{Coord, ResultRow};

pub fn format_real(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

/// Column names in order: sweep coordinates, `I_mn` row-major, `qcrb`,
/// per-parameter bounds, flags, timing.
pub fn header(rows: &[ResultRow], param_names: &[&str]) -> Vec<String> {
    let Some(first) = rows.first() else {
        return Vec::new();
    };
    let labels: Vec<&str> = param_names.iter().map(|n| short_label(n)).collect();
    let mut cols: Vec<String> = first.coords.iter().map(|(n, _)| n.clone()).collect();
    for a in &labels {
        for b in &labels {
            cols.push(format!("I_{a}{b}"));
        }
    }
    if first.qcrb.is_some() {
        cols.push("qcrb".into());
    }
    for a in &labels {
        cols.push(format!("qcrb_{a}"));
    }
    if first.oscillation.is_some() {
        cols.push("oscillation".into());
    }
    if first.wall_time_ms.is_some() {
        cols.push("wall_time_ms".into());
    }
    cols
}

enum Cell {
    Int(usize),
    Real(f64),
    Bool(bool),
}

fn cells(row: &ResultRow) -> Vec<Cell> {
    let mut out: Vec<Cell> = row
        .coords
        .iter()
        .map(|(_, c)| match c {
            Coord::Int(v) => Cell::Int(*v),
            Coord::Real(v) => Cell::Real(*v),
        })
        .collect();
    let d = row.info.nrows();
    for m in 0..d {
        for n in 0..d {
            out.push(Cell::Real(row.info[(m, n)]));
        }
    }
    if let Some(q) = row.qcrb {
        out.push(Cell::Real(q));
    }
    out.extend(row.diagonal_qcrb.iter().map(|v| Cell::Real(*v)));
    if let Some(o) = row.oscillation {
        out.push(Cell::Bool(o));
    }
    if let Some(t) = row.wall_time_ms {
        out.push(Cell::Real(t));
    }
    out
}

pub fn write_rows<W: Write>(out: W, rows: &[ResultRow], param_names: &[&str], format: Format) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(out, rows, param_names),
        Format::Json => write_json(out, rows, param_names),
    }
}

fn write_csv<W: Write>(out: W, rows: &[ResultRow], param_names: &[&str]) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header(rows, param_names))?;
    for row in rows {
        let record: Vec<String> = cells(row)
            .into_iter()
            .map(|c| match c {
                Cell::Int(v) => v.to_string(),
                Cell::Real(v) => format_real(v),
                Cell::Bool(b) => b.to_string(),
            })
            .collect();
        w.write_record(record)?;
    }
    w.flush()
}

fn write_json<W: Write>(mut out: W, rows: &[ResultRow], param_names: &[&str]) -> std::io::Result<()> {
    let names = header(rows, param_names);
    let array: Vec<Value> = rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (name, c) in names.iter().zip(cells(row)) {
                let v = match c {
                    Cell::Int(v) => Value::from(v),
                    Cell::Bool(b) => Value::Bool(b),
                    Cell::Real(v) if v.is_finite() => {
                        Value::Number(format_real(v).parse::<Number>().expect("formatted float is valid JSON"))
                    }
                    Cell::Real(_) => Value::Null,
                };
                obj.insert(name.clone(), v);
            }
            Value::Object(obj)
        })
        .collect();
    serde_json::to_writer_pretty(&mut out, &Value::Array(array))?;
    out.write_all(b"\n")
}
