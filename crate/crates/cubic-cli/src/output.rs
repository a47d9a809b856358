//! CSV and manifest writing with atomic replacement.

use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// Fixed scientific notation with 16 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.15e}")
}

pub struct Table {
    pub title: String,
    pub meta: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(title: impl Into<String>, columns: Vec<&'static str>) -> Self {
        Table {
            title: title.into(),
            meta: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn render(&self, manifest: &str) -> String {
        let mut s = format!("# {}\n# manifest: {manifest}\n", self.title);
        for m in &self.meta {
            s.push_str(&format!("# {m}\n"));
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct Manifest<C: Serialize, R: Serialize> {
    pub command: String,
    pub tool: &'static str,
    pub version: &'static str,
    pub configuration: C,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<String>,
    pub results: R,
}

pub fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

pub fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Output paths derived from a prefix: `<prefix><suffix>`.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes the tables and then the manifest that names them.
pub fn emit<C: Serialize, R: Serialize>(
    prefix: &Path,
    tables: &[(&str, &Table)],
    mut manifest: Manifest<C, R>,
) -> std::io::Result<Vec<PathBuf>> {
    let mpath = with_suffix(prefix, ".manifest.json");
    let mname = file_name(&mpath);
    let mut written = Vec::new();
    for (suffix, table) in tables {
        let p = with_suffix(prefix, suffix);
        write_atomic(&p, table.render(&mname).as_bytes())?;
        manifest.outputs.push(file_name(&p));
        written.push(p);
    }
    manifest.finished_unix = now();
    let json = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
    write_atomic(&mpath, (json + "\n").as_bytes())?;
    written.push(mpath);
    Ok(written)
}
