//! Shared helpers for CLI and acceptance tests: synthetic COCO fixtures and
//! a wrapper for driving the real binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Deterministic COCO-style caption + keypoint files for `n_images` images
/// (ids 1..=n), every one passing the human-centric filter.
pub fn write_coco_fixture(dir: &Path, n_images: u64) -> (PathBuf, PathBuf) {
    let mut images = Vec::new();
    let mut captions = Vec::new();
    let mut annotations = Vec::new();

    for image_id in 1..=n_images {
        images.push(serde_json::json!({
            "id": image_id,
            "file_name": format!("COCO_val2014_{image_id:012}.jpg"),
            "width": 640,
            "height": 480,
        }));
        for c in 0..5 {
            captions.push(serde_json::json!({
                "image_id": image_id,
                "caption": format!("Caption {c} about the people in image {image_id}."),
            }));
        }
        // One or two persons per image, deterministic geometry.
        let persons = 1 + (image_id % 2);
        for p in 0..persons {
            let mut keypoints = Vec::with_capacity(51);
            for k in 0..17u64 {
                // Last 4 keypoints of the second person unlabeled.
                if p == 1 && k >= 13 {
                    keypoints.extend_from_slice(&[0.0, 0.0, 0.0]);
                } else {
                    keypoints.push(((image_id * 13 + p * 31 + k * 7) % 640) as f64);
                    keypoints.push(((image_id * 17 + p * 11 + k * 5) % 480) as f64);
                    keypoints.push(if k % 5 == 4 { 1.0 } else { 2.0 });
                }
            }
            let labeled = keypoints.chunks(3).filter(|t| t[2] > 0.0).count();
            annotations.push(serde_json::json!({
                "id": image_id * 10 + p,
                "image_id": image_id,
                "bbox": [
                    (image_id % 50) as f64,
                    (image_id % 40) as f64,
                    200.0 + (p * 40) as f64,
                    300.0,
                ],
                "keypoints": keypoints,
                "num_keypoints": labeled,
                "iscrowd": 0,
            }));
        }
    }

    let captions_path = dir.join("captions.json");
    let keypoints_path = dir.join("person_keypoints.json");
    std::fs::write(
        &captions_path,
        serde_json::json!({"images": images, "annotations": captions}).to_string(),
    )
    .unwrap();
    std::fs::write(
        &keypoints_path,
        serde_json::json!({"annotations": annotations}).to_string(),
    )
    .unwrap();
    (captions_path, keypoints_path)
}

/// Run the compiled `poseforge` binary with `args` in `cwd`.
pub fn run_cli(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poseforge"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

pub fn assert_success(output: &Output) {
    assert!(
        output.status.success(),
        "command failed with {:?}\nstdout: {}\nstderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr),
    );
}

/// Standard pipeline: ingest the fixture and return the contexts path.
pub fn ingest_fixture(dir: &Path, n_images: u64) -> PathBuf {
    let (captions, keypoints) = write_coco_fixture(dir, n_images);
    let contexts = dir.join("contexts.jsonl");
    let output = run_cli(
        dir,
        &[
            "ingest",
            "--captions",
            captions.to_str().unwrap(),
            "--keypoints",
            keypoints.to_str().unwrap(),
            "--out",
            contexts.to_str().unwrap(),
        ],
    );
    assert_success(&output);
    contexts
}
