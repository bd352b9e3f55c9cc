//! Run manifests: a JSON sidecar describing how an output was produced.
//!
//! Data files never contain timestamps; only the manifest does, so two runs
//! with equal manifests (ignoring the clock fields) produce identical bytes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    /// FNV-1a of the canonical effective config, hex.
    pub config_hash: String,
    pub seed: u64,
    pub overrides: BTreeMap<String, serde_json::Value>,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn hash_hex(hash: u64) -> String {
    format!("{hash:016x}")
}

fn entry(path: &Path) -> FileEntry {
    FileEntry {
        path: path.display().to_string(),
        sha256: std::fs::read(path).map_or_else(|_| String::new(), |b| sha256_hex(&b)),
    }
}

/// Collects inputs and outputs while a command runs.
pub struct ManifestBuilder {
    manifest: RunManifest,
}

impl ManifestBuilder {
    pub fn start(subcommand: &str, config_hash: u64, seed: u64) -> Self {
        Self {
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                subcommand: subcommand.to_owned(),
                config_hash: hash_hex(config_hash),
                seed,
                overrides: BTreeMap::new(),
                inputs: Vec::new(),
                outputs: Vec::new(),
                started_unix_ms: now_ms(),
                finished_unix_ms: 0,
            },
        }
    }

    pub fn overrides(mut self, overrides: BTreeMap<String, serde_json::Value>) -> Self {
        self.manifest.overrides = overrides;
        self
    }

    pub fn input(&mut self, path: &Path) {
        self.manifest.inputs.push(entry(path));
    }

    /// Writes `bytes` to `path` and records it.
    pub fn output(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        write_file(path, bytes)?;
        self.manifest.outputs.push(entry(path));
        Ok(())
    }

    /// Records a file written elsewhere.
    pub fn record_output(&mut self, path: &Path) {
        self.manifest.outputs.push(entry(path));
    }

    pub fn finish(mut self, path: &Path) -> Result<RunManifest, CliError> {
        self.manifest.finished_unix_ms = now_ms();
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        write_file(path, text.as_bytes())?;
        Ok(self.manifest)
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Output {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, bytes).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

/// `<file>.<suffix>` next to `file`.
pub fn sidecar(file: &Path, suffix: &str) -> PathBuf {
    let mut name = file.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(suffix);
    file.with_file_name(name)
}
