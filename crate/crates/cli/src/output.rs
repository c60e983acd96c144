//! Versioned CSV and JSON writers. Every file carries the resolved run config.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context as _, Result};
use serde_json::{json, Map, Value};

pub const CSV_FORMAT: &str = "nanospin-csv/1";
pub const JSON_SCHEMA: &str = "nanospin-json/1";

pub struct Output {
    dir: PathBuf,
    command: &'static str,
    config: Vec<(String, String)>,
    notes: Vec<String>,
}

/// Round-trip float formatting: 17 significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Output {
    pub fn new(dir: PathBuf, command: &'static str, config: Vec<(String, String)>) -> Result<Self> {
        fs::create_dir_all(&dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self { dir, command, config, notes: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn command(&self) -> &'static str {
        self.command
    }

    /// Attaches a note to every subsequently written file and echoes it to stderr.
    pub fn note(&mut self, note: impl Into<String>) {
        let note = note.into();
        eprintln!("note: {note}");
        self.notes.push(note);
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        eprintln!("wrote {}", path.display());
        Ok(path)
    }

    pub fn write_csv(&self, name: &str, header: &[&str], columns: &[&[f64]]) -> Result<PathBuf> {
        ensure!(header.len() == columns.len(), "{} headers for {} columns", header.len(), columns.len());
        let rows = columns.first().map_or(0, |c| c.len());
        ensure!(columns.iter().all(|c| c.len() == rows), "ragged CSV columns");
        let mut text = String::new();
        writeln!(text, "# format_version = {CSV_FORMAT}")?;
        writeln!(text, "# command = {}", self.command)?;
        for (key, value) in &self.config {
            writeln!(text, "# config: {key} = {value}")?;
        }
        for note in &self.notes {
            writeln!(text, "# note: {note}")?;
        }
        writeln!(text, "{}", header.join(","))?;
        for row in 0..rows {
            let cells: Vec<String> = columns.iter().map(|c| float(c[row])).collect();
            writeln!(text, "{}", cells.join(","))?;
        }
        self.write(name, &text)
    }

    /// Wraps `body` with `schema_version`, `command`, `config` and `notes`.
    pub fn document(&self, body: Value) -> Value {
        let config: Map<String, Value> =
            self.config.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let mut doc = json!({
            "schema_version": JSON_SCHEMA,
            "command": self.command,
            "config": config,
            "notes": self.notes,
        });
        if let (Value::Object(doc), Value::Object(body)) = (&mut doc, body) {
            doc.extend(body);
        }
        doc
    }

    pub fn write_json(&self, name: &str, body: Value) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(&self.document(body))?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn write_text(&self, name: &str, contents: &str) -> Result<PathBuf> {
        self.write(name, contents)
    }
}
