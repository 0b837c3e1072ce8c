//! Run configuration: one JSON file, flag-overridable, unknown keys rejected.

use std::path::{Path, PathBuf};

use poseforge_core::prompt::ContextMode;
use poseforge_core::scoring::ScoreMethod;
use serde::{Deserialize, Serialize};

use crate::files::{self, FileError};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    File(#[from] FileError),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextModeConfig {
    Combined,
    PerSection,
}

impl From<ContextModeConfig> for ContextMode {
    fn from(mode: ContextModeConfig) -> Self {
        match mode {
            ContextModeConfig::Combined => ContextMode::Combined,
            ContextModeConfig::PerSection => ContextMode::PerSection,
        }
    }
}

/// Pipeline-wide settings. Every field has a default; a config file only
/// needs the keys it overrides, and unknown keys are an error.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub global_seed: u64,
    /// Decimal places for normalized coordinates.
    pub precision: u8,
    pub model_name: String,
    pub temperature_generate: f64,
    pub temperature_judge: f64,
    pub max_output_tokens: u32,
    pub max_in_flight: usize,
    pub cache_dir: PathBuf,
    /// Directory of editable prompt assets; built-in defaults when unset.
    pub assets_dir: Option<PathBuf>,
    pub min_labeled_keypoints: u32,
    /// Per-minute request budget; unlimited when unset.
    pub requests_per_minute: Option<u32>,
    pub retry_max_attempts: u32,
    pub retry_base_delay_ms: u64,
    pub run_log_path: PathBuf,
    /// Judge each item a second time with answer positions swapped.
    pub judge_position_swap: bool,
    pub score_method: ScoreMethod,
    pub context_mode: ContextModeConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            global_seed: 42,
            precision: 3,
            model_name: "gpt-4o".into(),
            temperature_generate: 0.7,
            temperature_judge: 0.0,
            max_output_tokens: 1024,
            max_in_flight: 4,
            cache_dir: PathBuf::from("cache"),
            assets_dir: None,
            min_labeled_keypoints: 1,
            requests_per_minute: None,
            retry_max_attempts: 5,
            retry_base_delay_ms: 1000,
            run_log_path: PathBuf::from("poseforge_run_log.jsonl"),
            judge_position_swap: false,
            score_method: ScoreMethod::RatioOfMeans,
            context_mode: ContextModeConfig::Combined,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let config: RunConfig = files::read_json(path)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.precision > 9 {
            return Err(ConfigError::Invalid("precision must be 0..=9".into()));
        }
        if self.temperature_generate < 0.0 || self.temperature_judge < 0.0 {
            return Err(ConfigError::Invalid("temperatures must be >= 0".into()));
        }
        if self.max_in_flight == 0 {
            return Err(ConfigError::Invalid("max_in_flight must be >= 1".into()));
        }
        if self.retry_max_attempts == 0 {
            return Err(ConfigError::Invalid("retry_max_attempts must be >= 1".into()));
        }
        if self.max_output_tokens == 0 {
            return Err(ConfigError::Invalid("max_output_tokens must be >= 1".into()));
        }
        Ok(())
    }

    /// Hash of the effective configuration, recorded in the run log.
    pub fn config_hash(&self) -> String {
        files::sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }
}
