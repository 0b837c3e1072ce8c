//! Append-only run log: one JSON line per invocation with config, input, and
//! output hashes, so any artifact is traceable to the run that produced it.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::files::{self, FileError};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub timestamp: String,
    pub subcommand: String,
    pub config_hash: String,
    pub seed: u64,
    pub backend: Option<String>,
    /// sha256 per input path.
    pub inputs: BTreeMap<String, String>,
    /// sha256 per output path.
    pub outputs: BTreeMap<String, String>,
    pub status: String,
}

impl RunRecord {
    pub fn new(subcommand: &str, config_hash: String, seed: u64) -> Self {
        Self {
            timestamp: chrono::Utc::now().to_rfc3339(),
            subcommand: subcommand.to_string(),
            config_hash,
            seed,
            backend: None,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            status: "ok".into(),
        }
    }

    pub fn hash_input(&mut self, path: &Path) {
        if let Ok(hash) = files::sha256_file(path) {
            self.inputs.insert(path.display().to_string(), hash);
        }
    }

    pub fn hash_output(&mut self, path: &Path) {
        if let Ok(hash) = files::sha256_file(path) {
            self.outputs.insert(path.display().to_string(), hash);
        }
    }
}

/// Append one record to the run log (created on first use).
pub fn append(log_path: &Path, record: &RunRecord) -> Result<(), FileError> {
    if let Some(dir) = log_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| FileError::io(dir, e))?;
    }
    let mut line = serde_json::to_string(record).map_err(|source| FileError::Json {
        path: log_path.to_path_buf(),
        source,
    })?;
    line.push('\n');
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(log_path)
        .map_err(|e| FileError::io(log_path, e))?;
    file.write_all(line.as_bytes())
        .map_err(|e| FileError::io(log_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_accumulate_as_json_lines() {
        let dir = tempfile::tempdir().unwrap();
        let log = dir.path().join("runs.jsonl");
        let input = dir.path().join("in.txt");
        std::fs::write(&input, "data").unwrap();

        let mut record = RunRecord::new("ingest", "cfg-hash".into(), 42);
        record.hash_input(&input);
        append(&log, &record).unwrap();
        append(&log, &RunRecord::new("stats", "cfg-hash".into(), 42)).unwrap();

        let records: Vec<RunRecord> = files::read_jsonl(&log).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].subcommand, "ingest");
        assert_eq!(records[0].inputs.len(), 1);
        assert_eq!(records[1].subcommand, "stats");
    }
}
