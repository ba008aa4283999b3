//! Run manifests: config echo, tool version, wall time and output digests.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io;
use std::path::Path;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub schema_version: String,
    pub verb: String,
    pub config: BTreeMap<String, String>,
    pub wall_time_seconds: f64,
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        let mut text = serde_json::to_vec_pretty(self).map_err(io::Error::other)?;
        text.push(b'\n');
        std::fs::write(dir.join(MANIFEST_FILE), text)
    }

    pub fn read(dir: &Path) -> io::Result<Self> {
        let text = std::fs::read(dir.join(MANIFEST_FILE))?;
        serde_json::from_slice(&text).map_err(io::Error::other)
    }

    /// Files whose digest no longer matches the manifest.
    pub fn mismatches(&self, dir: &Path) -> io::Result<Vec<String>> {
        let mut bad = Vec::new();
        for out in &self.outputs {
            let data = std::fs::read(dir.join(&out.file))?;
            if sha256_hex(&data) != out.sha256 || data.len() as u64 != out.bytes {
                bad.push(out.file.clone());
            }
        }
        Ok(bad)
    }
}
