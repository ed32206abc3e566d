//! Manifests, result rows and the two output formats.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    Csv,
    /// One JSON object per line.
    #[default]
    Records,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub kappa: Option<f64>,
    pub replicates: Option<usize>,
    pub samples: Option<u64>,
    pub sample_constant: f64,
    pub seed: u64,
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub instance: Option<String>,
    pub instance_hash: Option<String>,
    pub config: RunConfig,
    pub outputs: Vec<String>,
}

/// One experiment or solve result. Every number carries the seed that
/// produced it; `runtime` is in simplex pivots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub suite: String,
    pub instance: String,
    pub method: String,
    pub param: String,
    pub seed: u64,
    pub value: f64,
    pub opt: Option<f64>,
    pub ratio: Option<f64>,
    pub bound: Option<f64>,
    pub pass: Option<bool>,
    pub runtime: u64,
}

#[derive(Serialize)]
struct Tagged<'a, T> {
    record: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

pub fn record_line<T: Serialize>(kind: &str, body: &T) -> Result<String> {
    let mut line = serde_json::to_string(&Tagged { record: kind, body })?;
    line.push('\n');
    Ok(line)
}

pub fn csv_table<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner().context("flushing csv")?)?)
}

/// Writes to `out` or standard output; with a file the manifest goes next
/// to it as `<out>.manifest.json`.
pub fn emit(out: Option<&Path>, body: &str, manifest: &RunManifest) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
            let side = manifest_path(path);
            let mut text = serde_json::to_string_pretty(manifest)?;
            text.push('\n');
            std::fs::write(&side, text).with_context(|| format!("writing {}", side.display()))?;
        }
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

pub fn manifest_path(out: &Path) -> std::path::PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    name.into()
}
