use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cli::OutputFormat;

/// A rectangular result set rendered to CSV or JSON.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_owned(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len(), "{}", self.name);
        self.rows.push(row);
    }

    fn render_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner()?)
    }

    fn render_json(&self) -> Result<Vec<u8>> {
        let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|r| {
                self.columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| (c.clone(), json_cell(v)))
                    .collect()
            })
            .collect();
        let mut out = serde_json::to_vec_pretty(&rows)?;
        out.push(b'\n');
        Ok(out)
    }
}

/// Numbers keep their exact text; `true`/`false` become booleans; empty cells null.
fn json_cell(v: &str) -> serde_json::Value {
    match v {
        "" => serde_json::Value::Null,
        "true" => serde_json::Value::Bool(true),
        "false" => serde_json::Value::Bool(false),
        _ => match serde_json::from_str::<serde_json::Number>(v) {
            Ok(n) if n.to_string() == v => serde_json::Value::Number(n),
            _ => serde_json::Value::String(v.to_owned()),
        },
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ManifestEntry {
    pub file: String,
    pub rows: usize,
    pub sha256: String,
}

/// Writes tables atomically into one directory and records a manifest.
pub struct OutputDir {
    dir: PathBuf,
    format: OutputFormat,
    entries: Vec<ManifestEntry>,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    let mut f =
        fs::File::create(&tmp).with_context(|| format!("cannot write {}", tmp.display()))?;
    f.write_all(bytes)
        .and_then(|_| f.sync_all())
        .with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("cannot move output into {}", path.display()))?;
    Ok(())
}

impl OutputDir {
    pub fn create(dir: &Path, format: OutputFormat) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_owned(),
            format,
            entries: Vec::new(),
        })
    }

    pub fn write(&mut self, table: &Table) -> Result<()> {
        let (ext, bytes) = match self.format {
            OutputFormat::Csv => ("csv", table.render_csv()?),
            OutputFormat::Json => ("json", table.render_json()?),
        };
        let file = format!("{}.{ext}", table.name);
        write_atomic(&self.dir.join(&file), &bytes)?;
        log::info!("wrote {} ({} rows)", file, table.rows.len());
        self.entries.retain(|e| e.file != file);
        self.entries.push(ManifestEntry {
            file,
            rows: table.rows.len(),
            sha256: format!("{:x}", Sha256::digest(&bytes)),
        });
        Ok(())
    }

    /// Writes `manifest.json`, files in lexicographic order.
    pub fn finish(mut self) -> Result<Vec<ManifestEntry>> {
        self.entries.sort_by(|a, b| a.file.cmp(&b.file));
        let manifest = serde_json::json!({ "files": self.entries });
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        write_atomic(&self.dir.join("manifest.json"), &bytes)?;
        Ok(self.entries)
    }
}
