use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonical effective config, so reformatting a config file keeps the digest.
    pub config_digest: String,
    /// The config file exactly as read, when one was given.
    pub config_text: Option<String>,
    /// Effective config with every default written out.
    pub effective_config: String,
    pub seed: u64,
    pub workers: Option<usize>,
    pub version: String,
    pub started: String,
    pub finished: String,
    pub files: Vec<OutputFile>,
    pub exit_code: u8,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn now() -> String {
    OffsetDateTime::now_utc().format(&Rfc3339).unwrap_or_default()
}

pub fn describe_files(out: &Path, files: &[PathBuf]) -> Result<Vec<OutputFile>, CliError> {
    files
        .iter()
        .map(|p| {
            let bytes = std::fs::read(p).map_err(|e| CliError::io(p, e))?;
            let rel = p.strip_prefix(out).unwrap_or(p);
            Ok(OutputFile { path: rel.display().to_string(), sha256: sha256_hex(&bytes) })
        })
        .collect()
}

impl RunManifest {
    pub fn write(&self, out: &Path) -> Result<PathBuf, CliError> {
        let path = out.join("manifest.json");
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Data(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_hex_sha256() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
