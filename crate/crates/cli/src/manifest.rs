//! Run manifests: every command records its resolved configuration and
//! artifact names next to its outputs, enough to re-run the command.
//! Artifact paths are relative and no timestamps are recorded, so manifests
//! are byte-identical across reproduced runs.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub format_version: u32,
    pub command: &'a str,
    pub seed: u64,
    pub config: Value,
    pub artifacts: Vec<String>,
}

impl<'a> RunManifest<'a> {
    pub fn new(command: &'a str, seed: u64, config: Value, artifacts: &[&str]) -> Self {
        Self {
            format_version: 1,
            command,
            seed,
            config,
            artifacts: artifacts.iter().map(|a| a.to_string()).collect(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}
