//! Optional JSON config file, merged under command-line flags (flags win).
//!
//! ```json
//! {
//!   "llm": {"base_url": "...", "model": "...", "api_key_env": "...",
//!            "timeout_seconds": 60, "max_retries": 2, "temperature": 0.0},
//!   "grounding": {"samples": 64, "sigma_initial_factor": 1.5,
//!                  "sigma_growth": 1.5, "max_attempts": 512},
//!   "train": {"learning_rate": 0.001, "batch_size": 64, "max_epochs": 50,
//!              "patience": 5, "val_fraction": 0.15}
//! }
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub llm: LlmFileConfig,
    #[serde(default)]
    pub grounding: GroundingFileConfig,
    #[serde(default)]
    pub train: TrainFileConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmFileConfig {
    pub base_url: Option<String>,
    pub model: Option<String>,
    pub api_key_env: Option<String>,
    pub timeout_seconds: Option<u64>,
    pub max_retries: Option<u32>,
    pub temperature: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundingFileConfig {
    pub samples: Option<usize>,
    pub sigma_initial_factor: Option<f64>,
    pub sigma_growth: Option<f64>,
    pub max_attempts: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainFileConfig {
    pub learning_rate: Option<f64>,
    pub batch_size: Option<usize>,
    pub max_epochs: Option<usize>,
    pub patience: Option<usize>,
    pub val_fraction: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}
