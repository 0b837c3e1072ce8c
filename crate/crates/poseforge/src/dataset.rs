//! Dataset file assembly: merge per-kind JSONL sample streams into one
//! trainer-compatible JSON array with a sidecar manifest.

use std::path::{Path, PathBuf};

use poseforge_core::assemble::{assemble_samples, compute_stats, DatasetManifest, DatasetStats};
use poseforge_core::sample::InstructionSample;

use crate::error::PipelineError;
use crate::files;

/// Everything the manifest records besides the counts.
#[derive(Debug, Clone)]
pub struct ManifestInfo {
    pub global_seed: u64,
    pub precision: u8,
    pub asset_hashes: std::collections::BTreeMap<String, String>,
    pub model_name: String,
    pub temperature: f64,
}

pub fn read_sample_stream(path: &Path) -> Result<Vec<InstructionSample>, PipelineError> {
    files::read_jsonl(path).map_err(Into::into)
}

pub fn write_sample_stream(
    path: &Path,
    samples: &[InstructionSample],
) -> Result<(), PipelineError> {
    files::write_jsonl(path, samples).map_err(Into::into)
}

/// Dataset file: a JSON array of sample objects.
pub fn read_dataset(path: &Path) -> Result<Vec<InstructionSample>, PipelineError> {
    files::read_json(path).map_err(Into::into)
}

/// Merge sample streams, write the dataset and its manifest. Counts in the
/// manifest come from re-reading the written dataset, not from the in-memory
/// merge.
pub fn assemble_files(
    inputs: &[PathBuf],
    dataset_path: &Path,
    manifest_path: &Path,
    info: &ManifestInfo,
) -> Result<DatasetManifest, PipelineError> {
    let mut streams = Vec::with_capacity(inputs.len());
    for path in inputs {
        streams.push(read_sample_stream(path)?);
    }
    let (merged, _) = assemble_samples(streams);
    files::write_json(dataset_path, &merged)?;

    // Re-scan the artifact so the manifest never drifts from disk.
    let written = read_dataset(dataset_path)?;
    let (_, counts) = assemble_samples(vec![written]);

    let manifest = DatasetManifest {
        total: counts.total(),
        counts,
        global_seed: info.global_seed,
        precision: info.precision,
        asset_hashes: info.asset_hashes.clone(),
        model_name: info.model_name.clone(),
        temperature: info.temperature,
        created_at: chrono::Utc::now().to_rfc3339(),
    };
    files::write_json(manifest_path, &manifest)?;
    Ok(manifest)
}

/// Compute stats over a dataset file.
pub fn stats_for_file(dataset_path: &Path) -> Result<DatasetStats, PipelineError> {
    let samples = read_dataset(dataset_path)?;
    Ok(compute_stats(&samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use poseforge_core::coco::RawImageMeta;
    use poseforge_core::kind::DataKind;
    use poseforge_core::sample::make_detail_sample;

    fn sample(image_id: u64, kind: DataKind) -> InstructionSample {
        let meta = RawImageMeta {
            image_id,
            file_name: format!("{image_id}.jpg"),
            width: 10,
            height: 10,
        };
        let mut s = make_detail_sample("Describe.", "Words.", &meta, 0).unwrap();
        s.sample_id.kind = kind;
        s
    }

    fn info() -> ManifestInfo {
        ManifestInfo {
            global_seed: 42,
            precision: 3,
            asset_hashes: Default::default(),
            model_name: "mock-model".into(),
            temperature: 0.7,
        }
    }

    #[test]
    fn dedup_across_streams_with_manifest_rescan() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.jsonl");
        let b = dir.path().join("b.jsonl");
        write_sample_stream(
            &a,
            &[
                sample(1, DataKind::Conversation),
                sample(2, DataKind::Conversation),
                sample(3, DataKind::DetailedDescription),
            ],
        )
        .unwrap();
        write_sample_stream(
            &b,
            &[
                sample(2, DataKind::Conversation), // duplicate id
                sample(3, DataKind::ComplexReasoning),
                sample(4, DataKind::Conversation),
            ],
        )
        .unwrap();

        let dataset = dir.path().join("dataset.json");
        let manifest_path = dir.path().join("dataset.manifest.json");
        let manifest =
            assemble_files(&[a, b], &dataset, &manifest_path, &info()).unwrap();
        assert_eq!(manifest.total, 5);
        assert_eq!(manifest.counts.conversation, 3);
        assert_eq!(manifest.counts.detailed_description, 1);
        assert_eq!(manifest.counts.complex_reasoning, 1);
        assert_eq!(manifest.total, read_dataset(&dataset).unwrap().len() as u64);
    }

    #[test]
    fn empty_inputs_give_empty_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.jsonl");
        write_sample_stream(&a, &[]).unwrap();
        let dataset = dir.path().join("dataset.json");
        let manifest =
            assemble_files(&[a], &dataset, &dir.path().join("m.json"), &info()).unwrap();
        assert_eq!(manifest.total, 0);
        assert!(read_dataset(&dataset).unwrap().is_empty());
    }

    #[test]
    fn schema_violations_carry_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.jsonl");
        std::fs::write(&a, "{\"id\": \"1-conversation-0\", \"image\": \"x\", \"conversations\": []}\n{\"bogus\": 1}\n").unwrap();
        let err = read_sample_stream(&a).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("a.jsonl:2"), "{text}");
    }

    #[test]
    fn stats_match_assembled_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.jsonl");
        write_sample_stream(
            &a,
            &[
                sample(1, DataKind::Conversation),
                sample(1, DataKind::DetailedDescription),
                sample(2, DataKind::Conversation),
            ],
        )
        .unwrap();
        let dataset = dir.path().join("dataset.json");
        assemble_files(&[a], &dataset, &dir.path().join("m.json"), &info()).unwrap();
        let stats = stats_for_file(&dataset).unwrap();
        assert_eq!(stats.total, 3);
        assert_eq!(stats.distinct_images, 2);
        assert_eq!(stats.counts.conversation, 2);
        assert_eq!(stats.paper_target.total, 200_328);
    }
}
