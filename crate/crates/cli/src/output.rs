//! Emitted documents: CSV with a `#` metadata header, or a JSON object
//! carrying the same metadata under `command` and `config`.

use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

use crate::{CliError, Format};

pub struct Document {
    pub command: &'static str,
    pub config: Value,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub csv: Table,
    pub json: Value,
}

#[derive(Default)]
pub struct Table {
    pub notes: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub footer: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            ..Table::default()
        }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }
}

/// Shortest round-trip rendering; identical bytes for identical values.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

impl Document {
    fn render(&self) -> String {
        match self.format {
            Format::Csv => {
                let mut s = String::new();
                s.push_str(&format!("# homsensor {} {}\n", self.command, env!("CARGO_PKG_VERSION")));
                s.push_str(&format!("# config: {}\n", self.config));
                for n in &self.csv.notes {
                    s.push_str(&format!("# {n}\n"));
                }
                s.push_str(&self.csv.columns.join(","));
                s.push('\n');
                for row in &self.csv.rows {
                    s.push_str(&row.join(","));
                    s.push('\n');
                }
                for f in &self.csv.footer {
                    s.push_str(&format!("# {f}\n"));
                }
                s
            }
            Format::Json => {
                let mut obj = json!({
                    "command": self.command,
                    "version": env!("CARGO_PKG_VERSION"),
                    "config": self.config,
                });
                if let (Value::Object(dst), Value::Object(src)) = (&mut obj, &self.json) {
                    for (k, v) in src {
                        dst.insert(k.clone(), v.clone());
                    }
                }
                let mut s = serde_json::to_string_pretty(&obj).expect("plain data serializes");
                s.push('\n');
                s
            }
        }
    }

    pub fn emit(&self) -> Result<(), CliError> {
        let text = self.render();
        match &self.out {
            Some(path) => {
                std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
            }
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(e.to_string())),
        }
    }
}
