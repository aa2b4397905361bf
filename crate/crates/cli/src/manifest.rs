//! Run manifest: everything needed to reproduce a run's artifacts.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Config;

#[derive(Debug, Clone, Serialize)]
pub struct DatasetRecord {
    /// File path or `builtin:<name>`.
    pub source: String,
    pub sha256: String,
}

impl DatasetRecord {
    pub fn new(source: String, text: &str) -> Self {
        DatasetRecord {
            source,
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Resolved configuration, overrides applied.
    pub config: Config,
    pub overrides: Vec<String>,
    pub dataset: DatasetRecord,
    pub seed: u64,
    /// Worker threads requested; outputs do not depend on it.
    pub workers: Option<usize>,
    pub artifacts: Vec<PathBuf>,
    pub trajectories: u64,
    pub integration_steps: u64,
    pub wall_clock_seconds: f64,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}
