//! The fine-tuning hyperparameter hand-off artifact consumed by external
//! trainers. Fine-tuning itself is out of scope; this file is the boundary.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::files::{self, FileError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: u32,
    pub gradient_accumulation_steps: u32,
    pub learning_rate: f64,
    pub learning_rate_schedule: String,
    pub warmup_ratio: f64,
    pub optimizer: String,
    pub epochs: u32,
    pub weight_decay: f64,
    pub deepspeed_stage: u32,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 8,
            gradient_accumulation_steps: 2,
            learning_rate: 2e-5,
            learning_rate_schedule: "cosine decay".into(),
            warmup_ratio: 0.03,
            optimizer: "AdamW".into(),
            epochs: 1,
            weight_decay: 0.0,
            deepspeed_stage: 3,
        }
    }
}

pub fn write_train_config(path: &Path) -> Result<(), FileError> {
    files::write_json(path, &TrainConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emitted_values_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train_config.json");
        write_train_config(&path).unwrap();
        let parsed: TrainConfig = files::read_json(&path).unwrap();
        assert_eq!(parsed, TrainConfig::default());
        assert_eq!(parsed.batch_size, 8);
        assert_eq!(parsed.gradient_accumulation_steps, 2);
        assert_eq!(parsed.learning_rate, 2e-5);
        assert_eq!(parsed.learning_rate_schedule, "cosine decay");
        assert_eq!(parsed.warmup_ratio, 0.03);
        assert_eq!(parsed.optimizer, "AdamW");
        assert_eq!(parsed.epochs, 1);
        assert_eq!(parsed.weight_decay, 0.0);
        assert_eq!(parsed.deepspeed_stage, 3);
    }
}
