//! CSV rendering, atomic file writes and the run manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// In-memory output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        Self {
            name: name.into(),
            bytes: bytes.into(),
        }
    }

    pub fn sha256(&self) -> String {
        sha256_hex(&self.bytes)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Seventeen significant digits in scientific notation, independent of locale.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header plus rows of floating-point columns.
#[derive(Debug, Clone)]
pub struct Csv {
    columns: usize,
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self {
            columns: header.len(),
            text,
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.columns, "row width differs from header");
        let cells: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    /// Row with a leading text label.
    pub fn labeled_row(&mut self, label: &str, values: &[f64]) {
        assert_eq!(
            values.len() + 1,
            self.columns,
            "row width differs from header"
        );
        self.text.push_str(label);
        for &v in values {
            self.text.push(',');
            self.text.push_str(&fmt_f64(v));
        }
        self.text.push('\n');
    }

    pub fn into_artifact(self, name: &str) -> Artifact {
        Artifact::new(name, self.text)
    }
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> io::Result<PathBuf> {
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &target)?;
    Ok(target)
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: String,
    pub seed: u64,
    pub workers: Option<usize>,
    pub config: BTreeMap<String, String>,
    pub files: Vec<FileRecord>,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
