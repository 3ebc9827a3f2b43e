//! Table, CSV and JSON rendering. Numbers carry 17 significant digits.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde::Deserialize;
use serde_json::Value;

use serrin_core::experiments::fmt17;

use crate::config::Failure;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Table,
}

/// Flattens nested objects and arrays to `a.b[2].c` keys, in document order.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(a) if a.iter().all(|x| x.is_number()) && !a.is_empty() => {
            let items: Vec<String> = a.iter().map(scalar).collect();
            out.push((prefix.to_string(), items.join(" ")));
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        _ => out.push((prefix.to_string(), scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => fmt17(n.as_f64().unwrap_or(f64::NAN)),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Null => "n/a".into(),
        Value::Bool(b) => b.to_string(),
        other => other.to_string(),
    }
}

pub fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(v).expect("values serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", v, &mut rows);
            let mut s = String::from("key,value\n");
            for (k, x) in rows {
                writeln!(s, "{},{}", k, x.replace(',', ";")).unwrap();
            }
            s
        }
        Format::Table => {
            let mut rows = Vec::new();
            flatten("", v, &mut rows);
            let width = rows.iter().map(|r| r.0.chars().count()).max().unwrap_or(0);
            let mut s = String::new();
            for (k, x) in rows {
                let pad = width - k.chars().count();
                writeln!(s, "{k}{}  {x}", " ".repeat(pad)).unwrap();
            }
            s
        }
    }
}

pub fn write(text: &str, path: Option<&str>) -> Result<(), Failure> {
    match path {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("cannot write `{p}`: {e}"))),
    }
}

pub fn emit(v: &Value, format: Format, path: Option<&str>) -> Result<(), Failure> {
    write(&render(v, format), path)
}
