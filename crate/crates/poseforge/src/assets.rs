//! Prompt-assets directory: editable system prompts, the instruction pool,
//! few-shot samples, and the judge template, with content hashes for the
//! manifest and reports.
//!
//! Layout:
//!   conversation_system.txt
//!   detail_system.txt
//!   reasoning_system.txt
//!   detail_instructions.txt   (16 lines, one instruction per line)
//!   fewshot_samples.json      (array of {context, response})
//!   judge_system.txt

use std::collections::BTreeMap;
use std::path::Path;

use poseforge_core::prompt::{FewShotSample, PromptAssets};
use poseforge_core::scoring::JUDGE_SYSTEM;

use crate::files::{self, FileError};

pub const ASSET_FILES: [&str; 6] = [
    "conversation_system.txt",
    "detail_system.txt",
    "reasoning_system.txt",
    "detail_instructions.txt",
    "fewshot_samples.json",
    "judge_system.txt",
];

/// Prompt assets plus the judge template and per-asset content hashes.
#[derive(Debug, Clone)]
pub struct LoadedAssets {
    pub prompts: PromptAssets,
    pub judge_system: String,
    /// sha256 of each asset's effective content, keyed by file name.
    pub hashes: BTreeMap<String, String>,
}

impl LoadedAssets {
    /// Built-in defaults, used when no assets directory is configured.
    pub fn builtin() -> Self {
        let prompts = PromptAssets::builtin();
        let judge_system = JUDGE_SYSTEM.to_string();
        let hashes = hash_assets(&prompts, &judge_system);
        Self { prompts, judge_system, hashes }
    }

    /// Load from a directory. Files that are absent fall back to the
    /// built-in default for that asset; present-but-invalid files are errors.
    pub fn load(dir: &Path) -> Result<Self, FileError> {
        let builtin = PromptAssets::builtin();

        let conversation_system =
            read_text_or(dir, "conversation_system.txt", &builtin.conversation_system)?;
        let detail_system = read_text_or(dir, "detail_system.txt", &builtin.detail_system)?;
        let reasoning_system =
            read_text_or(dir, "reasoning_system.txt", &builtin.reasoning_system)?;
        let judge_system = read_text_or(dir, "judge_system.txt", JUDGE_SYSTEM)?;

        let instructions_path = dir.join("detail_instructions.txt");
        let detail_instructions = if instructions_path.exists() {
            files::read_to_string(&instructions_path)?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect()
        } else {
            builtin.detail_instructions.clone()
        };

        let fewshot_path = dir.join("fewshot_samples.json");
        let fewshot_samples: Vec<FewShotSample> = if fewshot_path.exists() {
            files::read_json(&fewshot_path)?
        } else {
            builtin.fewshot_samples.clone()
        };

        let prompts = PromptAssets {
            conversation_system,
            detail_system,
            reasoning_system,
            detail_instructions,
            fewshot_samples,
        };
        let hashes = hash_assets(&prompts, &judge_system);
        Ok(Self { prompts, judge_system, hashes })
    }

    pub fn judge_template_hash(&self) -> String {
        self.hashes["judge_system.txt"].clone()
    }
}

fn read_text_or(dir: &Path, name: &str, fallback: &str) -> Result<String, FileError> {
    let path = dir.join(name);
    if path.exists() {
        // Keep the text exactly as authored, minus a trailing newline that
        // editors append.
        let text = files::read_to_string(&path)?;
        Ok(text.strip_suffix('\n').unwrap_or(&text).to_string())
    } else {
        Ok(fallback.to_string())
    }
}

fn hash_assets(prompts: &PromptAssets, judge_system: &str) -> BTreeMap<String, String> {
    let mut hashes = BTreeMap::new();
    hashes.insert(
        "conversation_system.txt".into(),
        files::sha256_hex(prompts.conversation_system.as_bytes()),
    );
    hashes.insert(
        "detail_system.txt".into(),
        files::sha256_hex(prompts.detail_system.as_bytes()),
    );
    hashes.insert(
        "reasoning_system.txt".into(),
        files::sha256_hex(prompts.reasoning_system.as_bytes()),
    );
    hashes.insert(
        "detail_instructions.txt".into(),
        files::sha256_hex(prompts.detail_instructions.join("\n").as_bytes()),
    );
    hashes.insert(
        "fewshot_samples.json".into(),
        files::sha256_hex(
            serde_json::to_string(&prompts.fewshot_samples)
                .expect("fewshots serialize")
                .as_bytes(),
        ),
    );
    hashes.insert("judge_system.txt".into(), files::sha256_hex(judge_system.as_bytes()));
    hashes
}

/// Materialize the built-in assets into a directory for editing.
pub fn write_defaults(dir: &Path) -> Result<(), FileError> {
    let builtin = PromptAssets::builtin();
    files::write_atomic(
        &dir.join("conversation_system.txt"),
        builtin.conversation_system.as_bytes(),
    )?;
    files::write_atomic(&dir.join("detail_system.txt"), builtin.detail_system.as_bytes())?;
    files::write_atomic(
        &dir.join("reasoning_system.txt"),
        builtin.reasoning_system.as_bytes(),
    )?;
    files::write_atomic(
        &dir.join("detail_instructions.txt"),
        builtin.detail_instructions.join("\n").as_bytes(),
    )?;
    files::write_json(&dir.join("fewshot_samples.json"), &builtin.fewshot_samples)?;
    files::write_atomic(&dir.join("judge_system.txt"), JUDGE_SYSTEM.as_bytes())?;
    Ok(())
}
