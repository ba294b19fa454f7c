//! Report files and the run manifest.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RawConfig;

/// A CSV table. `notes` go above the header as `#` comment lines.
pub struct Table {
    pub file: String,
    pub notes: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: impl Into<String>, header: &[&str]) -> Self {
        Table {
            file: file.into(),
            notes: Vec::new(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn note(mut self, line: impl Into<String>) -> Self {
        self.notes.push(line.into());
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        for n in &self.notes {
            writeln!(buf, "# {n}")?;
        }
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        Ok(w.into_inner().map_err(|e| anyhow::anyhow!("csv flush: {e}"))?)
    }
}

/// Shortest round-trip representation, so outputs are byte-stable.
pub fn num(x: f64) -> String {
    // -0 and 0 print the same
    format!("{}", if x == 0.0 { 0.0 } else { x })
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// What a command produced, before anything touches the disk.
pub struct Artifacts {
    pub tables: Vec<Table>,
    pub plots: Vec<(String, String)>,
    pub report: serde_json::Value,
}

#[derive(Serialize)]
struct RunSection<'a> {
    command: &'a str,
    verdict: &'a str,
    tolerance_profile: &'a str,
    seed: Option<u64>,
    nevlab_version: &'a str,
    cli_version: &'a str,
    config_sha256: Option<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    run: RunSection<'a>,
    /// file name → sha256 of its bytes
    artifacts: std::collections::BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a RawConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parameters: Option<&'a toml::Table>,
}

pub struct RunInfo<'a> {
    pub command: &'a str,
    pub verdict: &'a str,
    pub tolerance_profile: &'a str,
    pub seed: Option<u64>,
    pub config_bytes: Option<&'a [u8]>,
    pub config: Option<&'a RawConfig>,
    /// Flag-only parameters (commands without a config file).
    pub parameters: Option<&'a toml::Table>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(
    dir: &Path,
    name: &str,
    bytes: &[u8],
    hashes: &mut std::collections::BTreeMap<String, String>,
) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    hashes.insert(name.to_string(), sha256_hex(bytes));
    Ok(path)
}

/// Writes every artifact and then `manifest.toml` into `dir`.
pub fn write_all(dir: &Path, info: &RunInfo<'_>, artifacts: &Artifacts) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut hashes = std::collections::BTreeMap::new();
    let mut written = Vec::new();
    for t in &artifacts.tables {
        written.push(write_file(dir, &t.file, &t.to_bytes()?, &mut hashes)?);
    }
    for (name, svg) in &artifacts.plots {
        written.push(write_file(dir, name, svg.as_bytes(), &mut hashes)?);
    }
    let mut report = serde_json::to_vec_pretty(&artifacts.report)?;
    report.push(b'\n');
    written.push(write_file(
        dir,
        &format!("{}.json", info.command),
        &report,
        &mut hashes,
    )?);

    let manifest = Manifest {
        run: RunSection {
            command: info.command,
            verdict: info.verdict,
            tolerance_profile: info.tolerance_profile,
            seed: info.seed,
            nevlab_version: nevlab::VERSION,
            cli_version: env!("CARGO_PKG_VERSION"),
            config_sha256: info.config_bytes.map(sha256_hex),
        },
        artifacts: hashes,
        config: info.config,
        parameters: info.parameters,
    };
    let text = toml::to_string(&manifest).context("serializing manifest")?;
    let path = dir.join("manifest.toml");
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_bytes_have_notes_then_header() {
        let mut t = Table::new("x.csv", &["r", "T"]).note("T: characteristic");
        t.push(vec![num(2.0), num(0.5)]);
        let s = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert_eq!(s, "# T: characteristic\nr,T\n2,0.5\n");
    }

    #[test]
    fn hashes_are_hex_sha256() {
        assert_eq!(sha256_hex(b"").len(), 64);
        assert_eq!(&sha256_hex(b"abc")[..8], "ba7816bf");
    }
}
