//! Run manifest: what was read, with which seed, by which build.
//!
//! Kept in its own file next to the report so timestamps never leak into
//! the report bytes.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::io::InputFile;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn unix_millis() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub inputs: Vec<InputHash>,
    pub seed: Option<u64>,
    pub version: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub report_sha256: String,
    pub exit_code: i32,
}

impl RunManifest {
    /// Starts a manifest; input hashes are taken now, before any solve.
    pub fn begin(command: Vec<String>, inputs: &[&InputFile], seed: Option<u64>) -> Self {
        RunManifest {
            command,
            inputs: inputs
                .iter()
                .map(|f| InputHash {
                    path: f.path.clone(),
                    sha256: f.sha256.clone(),
                })
                .collect(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_ms: unix_millis(),
            finished_unix_ms: 0,
            report_sha256: String::new(),
            exit_code: 0,
        }
    }

    pub fn finish(&mut self, report: &str, exit_code: i32) {
        self.report_sha256 = sha256_hex(report.as_bytes());
        self.exit_code = exit_code;
        self.finished_unix_ms = unix_millis();
    }
}

/// `out/report.json` -> `out/report.manifest.json`.
pub fn manifest_path(report: &Path) -> PathBuf {
    let stem = report.file_stem().map_or_else(|| "report".into(), |s| s.to_string_lossy().into_owned());
    report.with_file_name(format!("{stem}.manifest.json"))
}
