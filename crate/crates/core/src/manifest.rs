//! Reproducibility envelope embedded in every report.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config: serde_json::Value,
    /// Input path -> `sha256:<hex>`.
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    /// Wall-clock creation time; the only field allowed to differ between
    /// replays.
    pub created_at: String,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            command: command.into(),
            tool_version: TOOL_VERSION.to_owned(),
            config,
            inputs: BTreeMap::new(),
            seed,
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    /// Hashes a file, or every regular file directly inside a directory.
    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        if path.is_dir() {
            let mut files: Vec<_> = fs::read_dir(path)
                .map_err(|e| Error::from(e).in_file(path))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            files.sort();
            for f in files {
                self.add_file(&f)?;
            }
            Ok(())
        } else {
            self.add_file(path)
        }
    }

    fn add_file(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
        self.inputs
            .insert(path.display().to_string(), digest(&bytes));
        Ok(())
    }

    /// Copy with the wall-clock field blanked, for replay comparisons.
    pub fn without_wall_clock(&self) -> Self {
        Self {
            created_at: String::new(),
            ..self.clone()
        }
    }
}

pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_known_value() {
        assert_eq!(
            digest(b"abc"),
            "sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn directory_inputs_are_sorted_and_hashed() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b.txt"), "2").unwrap();
        fs::write(dir.path().join("a.txt"), "1").unwrap();
        let mut m = RunManifest::new("test", serde_json::json!({}), Some(3));
        m.add_input(dir.path()).unwrap();
        let keys: Vec<_> = m.inputs.keys().cloned().collect();
        assert!(keys[0].ends_with("a.txt") && keys[1].ends_with("b.txt"));
        assert_eq!(m.inputs[&keys[0]], digest(b"1"));
    }
}
