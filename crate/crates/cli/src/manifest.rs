use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of_bytes(path: &str, bytes: &[u8]) -> Self {
        FileDigest { path: path.to_string(), sha256: sha256_hex(bytes) }
    }
}

/// Record of one invocation. Timestamps live only here, so two runs of the
/// same manifest differ only in `started_at` and `finished_at`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: serde_json::Value,
    pub seeds: Vec<u64>,
    pub version: String,
    pub inputs: Vec<FileDigest>,
    /// Files written, plus `<stdout>` for the main report when it went there.
    pub outputs: Vec<FileDigest>,
    pub started_at: f64,
    pub finished_at: f64,
}

impl RunManifest {
    pub fn new(subcommand: &str, params: serde_json::Value) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            params,
            seeds: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            started_at: now(),
            finished_at: 0.0,
        }
    }

    pub fn output(&self, path: &str) -> Option<&FileDigest> {
        self.outputs.iter().find(|d| d.path == path)
    }

    pub fn write(mut self, path: &Path) -> std::io::Result<()> {
        self.finished_at = now();
        let mut text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(path, text)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}
