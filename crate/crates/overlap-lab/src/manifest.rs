//! Run manifests: what was run, with what configuration, and digests of
//! everything written.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command_line: Vec<String>,
    /// Fully resolved configuration of the subcommand, as JSON.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub started_at: String,
    pub finished_at: String,
    /// "ok" or "failed: <reason>"; the manifest is emitted either way.
    pub status: String,
    pub outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn begin(command_line: Vec<String>, config: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            tool: "overlap-lab".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command_line,
            config,
            seed,
            started_at: chrono::Utc::now().to_rfc3339(),
            finished_at: String::new(),
            status: "running".to_string(),
            outputs: Vec::new(),
        }
    }

    pub fn record_output(&mut self, path: &Path, bytes: &[u8]) {
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        let digest = hasher.finalize();
        self.outputs.push(OutputDigest {
            path: path.display().to_string(),
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        });
    }

    pub fn finish(&mut self, status: &str) {
        self.finished_at = chrono::Utc::now().to_rfc3339();
        self.status = status.to_string();
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let bytes = serde_json::to_vec_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(path, bytes)
    }
}
