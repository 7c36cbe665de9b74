use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

/// Shortest decimal that round-trips.
pub fn num(x: f64) -> String {
    let mut buf = ryu::Buffer::new();
    buf.format(x).to_owned()
}

/// Comma-separated table with a mandatory header and LF line endings.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).context("serializing output")?;
    s.push('\n');
    Ok(s)
}

/// `out.csv` → `out.meta.json`
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

pub fn svg_path(path: &Path) -> PathBuf {
    path.with_extension("svg")
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes the data to `output` (or stdout) and, for file outputs, the
/// metadata sidecar next to it.
pub fn emit(output: Option<&Path>, data: &str, meta: Value, stamp: bool) -> Result<()> {
    let Some(path) = output else {
        let mut out = std::io::stdout().lock();
        out.write_all(data.as_bytes()).context("writing to standard output")?;
        return Ok(());
    };
    write_file(path, data)?;
    let mut meta = meta;
    if stamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        meta["timestamp"] = json!({ "unix_seconds": secs });
    }
    write_file(&sidecar_path(path), &to_json(&meta)?)
}

pub fn write_svg(output: Option<&Path>, svg: &str) -> Result<()> {
    let path = output.ok_or_else(|| crate::exit::Usage("--svg needs --output".into()))?;
    write_file(&svg_path(path), svg)
}
