//! Record emission. JSON lines keep key order; CSV flattens every record to
//! the union of keys (first-seen order), writes floats with 12 significant
//! digits and nested values as compact JSON.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::config::Format;
use crate::error::CliError;
use crate::Record;

pub fn output_path(dir: &Path, name: &str, format: Format) -> PathBuf {
    let ext = match format {
        Format::JsonLines => "jsonl",
        Format::Csv => "csv",
    };
    dir.join(format!("{name}.{ext}"))
}

pub fn emit_results<W: Write>(records: &[Record], format: Format, mut out: W) -> Result<(), CliError> {
    if records.is_empty() {
        return Err(CliError::Emit("no records to write".into()));
    }
    let err = |e: &dyn std::fmt::Display| CliError::Emit(e.to_string());
    match format {
        Format::JsonLines => {
            for r in records {
                let line = serde_json::to_string(r).map_err(|e| err(&e))?;
                writeln!(out, "{line}").map_err(|e| err(&e))?;
            }
        }
        Format::Csv => {
            let mut columns: Vec<&str> = Vec::new();
            for r in records {
                for k in r.keys() {
                    if !columns.contains(&k.as_str()) {
                        columns.push(k);
                    }
                }
            }
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&columns).map_err(|e| err(&e))?;
            for r in records {
                let cells: Vec<String> = columns.iter().map(|c| r.get(*c).map_or(String::new(), cell)).collect();
                w.write_record(&cells).map_err(|e| err(&e))?;
            }
            w.flush().map_err(|e| err(&e))?;
        }
    }
    Ok(())
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) if n.is_f64() => format!("{:.11e}", n.as_f64().unwrap_or(f64::NAN)),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
