//! Report rendering. Every report is serialized once to an ordered JSON
//! value and then written as JSON, CSV or plain text.
//!
//! Floating-point numbers are written with 17 significant digits
//! (`{:.16e}`), enough to round-trip any `f64`. Non-finite values become
//! JSON `null` and empty CSV cells.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_value<T: Serialize>(report: &T) -> Value {
    serde_json::to_value(report).expect("reports serialize to JSON")
}

pub fn write_json<W: Write>(out: &mut W, value: &Value) -> io::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut *out, Sig17);
    value.serialize(&mut ser).map_err(io::Error::other)?;
    out.write_all(b"\n")
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.to_string(),
            (None, Some(i)) => i.to_string(),
            _ => fmt_f64(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => s.clone(),
        Value::Array(_) | Value::Object(_) => unreachable!("flattened before use"),
    }
}

/// Flattens nested objects into dotted keys, in field order.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, child, out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), child, out);
            }
        }
        _ => out.push((prefix.to_string(), v.clone())),
    }
}

/// Splits a report into table rows: one per entry of a top-level `rows`
/// array (with the report's scalar fields prefixed), or one for the report.
fn table(value: &Value) -> Vec<Vec<(String, Value)>> {
    let Value::Object(map) = value else {
        return vec![vec![(String::from("value"), value.clone())]];
    };
    match map.get("rows") {
        Some(Value::Array(rows)) => {
            let mut head = Map::new();
            for (k, v) in map {
                if k != "rows" && k != "holds" && !v.is_object() && !v.is_array() {
                    head.insert(k.clone(), v.clone());
                }
            }
            rows.iter()
                .map(|row| {
                    let mut cells = Vec::new();
                    flatten("", &Value::Object(head.clone()), &mut cells);
                    flatten("", row, &mut cells);
                    cells
                })
                .collect()
        }
        _ => {
            let mut cells = Vec::new();
            flatten("", value, &mut cells);
            vec![cells]
        }
    }
}

pub fn write_csv<W: Write>(out: &mut W, value: &Value) -> io::Result<()> {
    let rows = table(value);
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = rows.first() {
        w.write_record(first.iter().map(|(k, _)| k.as_str()))?;
    }
    for row in &rows {
        w.write_record(row.iter().map(|(_, v)| scalar(v)))?;
    }
    w.flush()
}

fn human_scalar(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::Number(n) if n.is_f64() => format!("{}", n.as_f64().unwrap_or(f64::NAN)),
        other => scalar(other),
    }
}

pub fn write_human<W: Write>(out: &mut W, value: &Value) -> io::Result<()> {
    fn walk<W: Write>(out: &mut W, v: &Value, depth: usize) -> io::Result<()> {
        let pad = "  ".repeat(depth);
        match v {
            Value::Object(map) => {
                for (k, child) in map {
                    match child {
                        Value::Object(_) => {
                            writeln!(out, "{pad}{k}:")?;
                            walk(out, child, depth + 1)?;
                        }
                        Value::Array(items) => {
                            for (i, item) in items.iter().enumerate() {
                                writeln!(out, "{pad}{k}[{i}]:")?;
                                walk(out, item, depth + 1)?;
                            }
                        }
                        _ => writeln!(out, "{pad}{k}: {}", human_scalar(child))?,
                    }
                }
                Ok(())
            }
            _ => writeln!(out, "{pad}{}", human_scalar(v)),
        }
    }
    walk(out, value, 0)
}

pub fn write<W: Write>(out: &mut W, value: &Value, format: Format) -> io::Result<()> {
    match format {
        Format::Json => write_json(out, value),
        Format::Csv => write_csv(out, value),
        Format::Human => write_human(out, value),
    }
}
