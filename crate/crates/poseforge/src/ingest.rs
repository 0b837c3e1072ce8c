//! File-level COCO ingestion: read caption and keypoint annotation files,
//! join them into contexts, and stream contexts to/from JSON lines.

use std::collections::BTreeMap;
use std::path::Path;

use poseforge_core::coco::{
    build_contexts, parse_caption_json, parse_keypoint_json, ImageContext, RawImageMeta,
    RawPersonAnnotation,
};

use crate::error::PipelineError;
use crate::files;

#[derive(Debug, Clone, Copy)]
pub struct IngestParams {
    pub min_labeled_keypoints: u32,
    pub precision: u8,
}

pub fn parse_caption_file(
    path: &Path,
) -> Result<BTreeMap<u64, (RawImageMeta, Vec<String>)>, PipelineError> {
    let text = files::read_to_string(path)?;
    parse_caption_json(&text).map_err(|source| PipelineError::Coco {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_keypoint_file(
    path: &Path,
) -> Result<BTreeMap<u64, Vec<RawPersonAnnotation>>, PipelineError> {
    let text = files::read_to_string(path)?;
    parse_keypoint_json(&text).map_err(|source| PipelineError::Coco {
        path: path.to_path_buf(),
        source,
    })
}

/// Parse both annotation files and join them into human-centric contexts.
pub fn ingest(
    captions_path: &Path,
    keypoints_path: &Path,
    params: IngestParams,
) -> Result<Vec<ImageContext>, PipelineError> {
    let captions = parse_caption_file(captions_path)?;
    let keypoints = parse_keypoint_file(keypoints_path)?;
    Ok(build_contexts(
        &captions,
        &keypoints,
        params.min_labeled_keypoints,
        params.precision,
    ))
}

/// Contexts file: one JSON object per line.
pub fn write_contexts(path: &Path, contexts: &[ImageContext]) -> Result<(), PipelineError> {
    files::write_jsonl(path, contexts).map_err(Into::into)
}

pub fn read_contexts(path: &Path) -> Result<Vec<ImageContext>, PipelineError> {
    files::read_jsonl(path).map_err(Into::into)
}
