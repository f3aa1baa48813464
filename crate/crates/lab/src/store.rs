//! Run directory layout:
//!
//! ```text
//! <root>/<experiment>/
//!   config.toml      resolved configuration, defaults included
//!   results.csv      one row per sweep sample
//!   summary.json     verdicts, fits and notes
//!   <column>.svg     one chart per plotted quantity (optional)
//!   FAILED           present only when the experiment errored
//!   manifest.json    sha-256 of every file above, plus CSV columns
//! ```

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use inflation_core::experiments::ExperimentReport;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";
pub const CONFIG: &str = "config.toml";
pub const RESULTS: &str = "results.csv";
pub const SUMMARY: &str = "summary.json";
pub const FAILED: &str = "FAILED";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FileKind {
    Config,
    Table,
    Summary,
    Plot,
    FailureMarker,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub kind: FileKind,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub status: String,
    /// Column names of `results.csv`, in order.
    pub columns: Vec<String>,
    pub files: Vec<ManifestEntry>,
}

/// Collects the files of one run and writes the manifest last.
#[derive(Debug)]
pub struct ResultStore {
    dir: PathBuf,
    entries: Vec<ManifestEntry>,
}

/// Hex sha-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Formats a number with 17 significant digits; non-finite values are
/// written as `NaN`, `inf` or `-inf`.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

impl ResultStore {
    /// Creates (or empties) the run directory.
    pub fn create(dir: &Path) -> io::Result<Self> {
        if dir.exists() {
            for entry in fs::read_dir(dir)? {
                let path = entry?.path();
                if path.is_file() {
                    fs::remove_file(path)?;
                }
            }
        } else {
            fs::create_dir_all(dir)?;
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            entries: Vec::new(),
        })
    }

    /// Reopens a finished run, dropping its plots so they can be redrawn.
    pub fn adopt(dir: &Path, manifest: &Manifest) -> io::Result<Self> {
        let mut entries = Vec::new();
        for e in &manifest.files {
            if e.kind == FileKind::Plot {
                let path = dir.join(&e.path);
                if path.exists() {
                    fs::remove_file(path)?;
                }
            } else {
                entries.push(e.clone());
            }
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            entries,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn write(&mut self, name: &str, kind: FileKind, bytes: &[u8]) -> io::Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.entries.retain(|e| e.path != name);
        self.entries.push(ManifestEntry {
            path: name.to_string(),
            kind,
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    pub fn write_table(&mut self, report: &ExperimentReport) -> io::Result<PathBuf> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&report.columns)?;
        for row in &report.rows {
            w.write_record(row.iter().map(|v| format_number(*v)))?;
        }
        let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
        self.write(RESULTS, FileKind::Table, &bytes)
    }

    pub fn write_summary(&mut self, report: &ExperimentReport) -> io::Result<PathBuf> {
        let summary = serde_json::json!({
            "experiment": report.experiment,
            "passed": report.passed(),
            "verdicts": report.verdicts,
            "fits": report.fits,
            "notes": report.notes,
            "steps": report.steps,
            "config": report.config,
        });
        let mut text = serde_json::to_string_pretty(&summary).map_err(io::Error::other)?;
        text.push('\n');
        self.write(SUMMARY, FileKind::Summary, text.as_bytes())
    }

    /// Writes `manifest.json`; the entries are sorted by path.
    pub fn finish(mut self, experiment: &str, status: &str, columns: &[String]) -> io::Result<Manifest> {
        self.entries.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            experiment: experiment.to_string(),
            status: status.to_string(),
            columns: columns.to_vec(),
            files: self.entries,
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(self.dir.join(MANIFEST), text)?;
        Ok(manifest)
    }
}

pub fn read_manifest(dir: &Path) -> io::Result<Manifest> {
    let text = fs::read_to_string(dir.join(MANIFEST))?;
    serde_json::from_str(&text).map_err(io::Error::other)
}

/// Reads `results.csv` back into column names and rows.
pub fn read_table(path: &Path) -> io::Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(io::Error::other)?;
    let columns = r
        .headers()
        .map_err(io::Error::other)?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(io::Error::other)?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{f:?}: {e}")))
            })
            .collect::<io::Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((columns, rows))
}
