//! Output plumbing: machine-readable JSON or CSV to stdout or a file, with
//! the resolved configuration recorded in every document's header, and
//! human summaries on stderr.

use std::path::PathBuf;

use num_complex::Complex64;
use serde_json::{Map, Value};

use crate::errors::CliResult;
use crate::opts::json_f64;

pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(path: Option<PathBuf>) -> Self {
        Sink { path }
    }

    pub fn write(&self, text: &str) -> CliResult<()> {
        match &self.path {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

/// `{"command": ..., "config": {...}, ...body}` pretty-printed. serde_json
/// maps iterate in key order, so the bytes are deterministic.
pub fn json_document(
    command: &str,
    config: Map<String, Value>,
    body: Map<String, Value>,
) -> String {
    let mut doc = Map::new();
    doc.insert("command".to_string(), Value::String(command.to_string()));
    doc.insert("config".to_string(), Value::Object(config));
    for (k, v) in body {
        doc.insert(k, v);
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON serialization");
    text.push('\n');
    text
}

/// CSV with the command and resolved config on `#`-prefixed header lines.
pub fn csv_document(
    command: &str,
    config: &Map<String, Value>,
    columns: &str,
    rows: &[String],
) -> String {
    let config_line =
        serde_json::to_string(&Value::Object(config.clone())).expect("JSON serialization");
    let mut text = format!("# command: {command}\n# config: {config_line}\n{columns}\n");
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    text
}

pub fn complex_value(z: Complex64) -> Value {
    let mut m = Map::new();
    m.insert("re".to_string(), json_f64(z.re));
    m.insert("im".to_string(), json_f64(z.im));
    Value::Object(m)
}

/// Formats a float for CSV cells: serde_json's shortest round-trip form
/// (same digits as the JSON output, so the two formats agree byte-wise).
pub fn csv_f64(x: f64) -> String {
    serde_json::to_string(&json_f64(x)).expect("JSON serialization")
}
