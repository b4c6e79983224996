use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::Value;

/// A CSV table plus the JSON sidecar written next to it.
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub extra: Value,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            extra: Value::Null,
        }
    }

    pub fn with_header(name: &str, header: Vec<String>) -> Self {
        Self {
            name: name.to_string(),
            header,
            rows: Vec::new(),
            extra: Value::Null,
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        Ok(w.into_inner()?)
    }
}

/// Shortest round-trip formatting; negative zero prints as `0`.
pub fn num(v: f64) -> String {
    (v + 0.0).to_string()
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target)
        .with_context(|| format!("cannot write {}", target.display()))?;
    Ok(target)
}

/// Writes every table and its sidecar. All content is rendered before the
/// first file is touched, and each file is replaced atomically.
pub fn write_tables(dir: &Path, command: &str, config: &Value, tables: &[Table]) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let mut rendered = Vec::with_capacity(tables.len() * 2);
    for t in tables {
        rendered.push((format!("{}.csv", t.name), t.csv_bytes()?));
        let mut sidecar = serde_json::json!({
            "command": command,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "columns": t.header,
        });
        if !t.extra.is_null() {
            sidecar["summary"] = t.extra.clone();
        }
        let mut json = serde_json::to_vec_pretty(&sidecar)?;
        json.push(b'\n');
        rendered.push((format!("{}.json", t.name), json));
    }
    for (name, bytes) in &rendered {
        let path = write_atomic(dir, name, bytes)?;
        log::info!("wrote {}", path.display());
    }
    Ok(())
}
