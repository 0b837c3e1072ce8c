//! Property tests for the normalization, serialization, and assembly
//! invariants.

use std::collections::BTreeMap;

use proptest::prelude::*;

use poseforge_core::assemble::assemble_samples;
use poseforge_core::coco::{
    build_contexts, normalize_person, parse_caption_json, parse_keypoint_json, ImageContext,
    RawImageMeta, RawPersonAnnotation,
};
use poseforge_core::context::render_context;
use poseforge_core::kind::DataKind;
use poseforge_core::sample::{make_detail_sample, InstructionSample, SampleId};

fn meta(width: u32, height: u32) -> RawImageMeta {
    RawImageMeta {
        image_id: 1,
        file_name: "p.jpg".into(),
        width,
        height,
    }
}

/// Independent oracle: straight divide, clamp, and round through `f64::floor`
/// (std), a different code path from the library's integer-cast rounding.
fn oracle_norm(value: f64, extent: u32, precision: u8) -> f64 {
    let scaled = (value / f64::from(extent)).clamp(0.0, 1.0) * 10f64.powi(i32::from(precision));
    (scaled + 0.5).floor() / 10f64.powi(i32::from(precision))
}

proptest! {
    #[test]
    fn normalization_agrees_with_divide_and_clamp_oracle(
        x in -100.0f64..5000.0,
        y in -100.0f64..5000.0,
        w in 0.0f64..3000.0,
        h in 0.0f64..3000.0,
        width in 1u32..4000,
        height in 1u32..4000,
        kx in 0.0f64..5000.0,
        ky in 0.0f64..5000.0,
        v in 1u8..=2,
    ) {
        let mut keypoints = vec![0.0; 51];
        keypoints[0] = kx;
        keypoints[1] = ky;
        keypoints[2] = f64::from(v);
        let raw = RawPersonAnnotation {
            annotation_id: 1,
            image_id: 1,
            bbox_xywh: [x, y, w, h],
            keypoints_raw: keypoints,
            num_keypoints: 1,
        };
        let m = meta(width, height);
        let person = normalize_person(&raw, &m, 3);

        prop_assert_eq!(person.bbox_norm[0], oracle_norm(x, width, 3));
        prop_assert_eq!(person.bbox_norm[1], oracle_norm(y, height, 3));
        prop_assert_eq!(person.bbox_norm[2], oracle_norm(x + w, width, 3));
        prop_assert_eq!(person.bbox_norm[3], oracle_norm(y + h, height, 3));
        prop_assert_eq!(person.keypoints_norm[0].x, oracle_norm(kx, width, 3));
        prop_assert_eq!(person.keypoints_norm[0].y, oracle_norm(ky, height, 3));
        prop_assert_eq!(person.keypoints_norm[0].v, v);
        // The unlabeled tail maps to the zero triple.
        prop_assert!(person.keypoints_norm[1..]
            .iter()
            .all(|k| k.x == 0.0 && k.y == 0.0 && k.v == 0));
    }

    #[test]
    fn normalized_output_is_ordered_and_bounded(
        x in -100.0f64..5000.0,
        y in -100.0f64..5000.0,
        w in 0.0f64..3000.0,
        h in 0.0f64..3000.0,
        width in 1u32..4000,
        height in 1u32..4000,
    ) {
        let raw = RawPersonAnnotation {
            annotation_id: 1,
            image_id: 1,
            bbox_xywh: [x, y, w, h],
            keypoints_raw: vec![0.0; 51],
            num_keypoints: 0,
        };
        let person = normalize_person(&raw, &meta(width, height), 3);
        let [x1, y1, x2, y2] = person.bbox_norm;
        prop_assert!((0.0..=1.0).contains(&x1) && (0.0..=1.0).contains(&x2));
        prop_assert!((0.0..=1.0).contains(&y1) && (0.0..=1.0).contains(&y2));
        prop_assert!(x1 <= x2 && y1 <= y2);
    }

    #[test]
    fn normalization_idempotent_after_denormalization(
        px in 0.0f64..2000.0,
        extent in 1u32..3000,
    ) {
        // Round-trip through pixel space at the same precision is a fixpoint.
        let once = oracle_norm(px, extent, 3);
        let denorm = once * f64::from(extent);
        let twice = oracle_norm(denorm, extent, 3);
        prop_assert!((once - twice).abs() < 1e-12, "once={once} twice={twice}");
    }

    #[test]
    fn denormalize_within_one_rounding_ulp(
        px in 0.0f64..2000.0,
        extent in 1u32..3000,
    ) {
        let clamped = (px / f64::from(extent)).clamp(0.0, 1.0) * f64::from(extent);
        let denorm = oracle_norm(px, extent, 3) * f64::from(extent);
        // Rounding at 3 decimals moves a normalized value at most 5e-4.
        prop_assert!((denorm - clamped).abs() <= 0.5e-3 * f64::from(extent) + 1e-9);
    }

    #[test]
    fn dedup_never_drops_distinct_ids(ids in proptest::collection::vec((0u64..40, 0u32..3), 0..60)) {
        let samples: Vec<InstructionSample> = ids
            .iter()
            .map(|&(image_id, ordinal)| {
                let m = RawImageMeta {
                    image_id,
                    file_name: format!("{image_id}.jpg"),
                    width: 10,
                    height: 10,
                };
                make_detail_sample("i", "t", &m, ordinal).unwrap()
            })
            .collect();
        let distinct: std::collections::BTreeSet<SampleId> =
            samples.iter().map(|s| s.sample_id).collect();
        let (merged, counts) = assemble_samples(vec![samples]);
        prop_assert_eq!(merged.len(), distinct.len());
        prop_assert_eq!(counts.total() as usize, distinct.len());
    }
}

/// Deterministic fixture corpus used by the parse/serialize roundtrip and
/// count-conservation checks.
fn corpus() -> (String, String) {
    let captions = serde_json::json!({
        "images": [
            {"id": 10, "file_name": "10.jpg", "width": 640, "height": 480},
            {"id": 20, "file_name": "20.jpg", "width": 320, "height": 240},
            {"id": 30, "file_name": "30.jpg", "width": 500, "height": 500},
        ],
        "annotations": [
            {"image_id": 10, "caption": "two skiers"},
            {"image_id": 10, "caption": "snowy slope"},
            {"image_id": 20, "caption": "a tennis player"},
            {"image_id": 30, "caption": "empty street"},
        ]
    });
    let mut kps_visible = vec![0.0; 51];
    for i in 0..17 {
        kps_visible[i * 3] = 10.0 + i as f64;
        kps_visible[i * 3 + 1] = 20.0 + i as f64;
        kps_visible[i * 3 + 2] = 2.0;
    }
    let keypoints = serde_json::json!({
        "annotations": [
            {"id": 1, "image_id": 10, "bbox": [10.0, 20.0, 30.0, 40.0], "keypoints": kps_visible, "num_keypoints": 17, "iscrowd": 0},
            {"id": 2, "image_id": 10, "bbox": [0.0, 0.0, 5.0, 5.0], "keypoints": vec![0.0; 51], "num_keypoints": 0, "iscrowd": 0},
            {"id": 3, "image_id": 20, "bbox": [1.0, 1.0, 2.0, 2.0], "keypoints": kps_visible, "num_keypoints": 17, "iscrowd": 0},
        ]
    });
    (captions.to_string(), keypoints.to_string())
}

#[test]
fn parse_serialize_parse_roundtrip_is_identity() {
    let (captions_json, keypoints_json) = corpus();
    let captions = parse_caption_json(&captions_json).unwrap();
    let keypoints = parse_keypoint_json(&keypoints_json).unwrap();
    let contexts = build_contexts(&captions, &keypoints, 1, 3);

    let serialized: Vec<String> = contexts
        .iter()
        .map(|c| serde_json::to_string(c).unwrap())
        .collect();
    let reparsed: Vec<ImageContext> = serialized
        .iter()
        .map(|line| serde_json::from_str(line).unwrap())
        .collect();
    assert_eq!(contexts, reparsed);

    let reserialized: Vec<String> = reparsed
        .iter()
        .map(|c| serde_json::to_string(c).unwrap())
        .collect();
    assert_eq!(serialized, reserialized, "serialization is byte-stable");
}

#[test]
fn context_build_is_deterministic() {
    let (captions_json, keypoints_json) = corpus();
    let run = || {
        let captions = parse_caption_json(&captions_json).unwrap();
        let keypoints = parse_keypoint_json(&keypoints_json).unwrap();
        build_contexts(&captions, &keypoints, 1, 3)
            .iter()
            .map(|c| serde_json::to_string(c).unwrap())
            .collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

#[test]
fn person_count_conserved_against_brute_force() {
    let (captions_json, keypoints_json) = corpus();
    let captions = parse_caption_json(&captions_json).unwrap();
    let keypoints = parse_keypoint_json(&keypoints_json).unwrap();
    let min_kp = 1;
    let contexts = build_contexts(&captions, &keypoints, min_kp, 3);

    let emitted: usize = contexts.iter().map(|c| c.persons.len()).sum();
    // Brute force: count raw annotations passing the filter in captioned images.
    let mut expected = 0;
    for (image_id, anns) in &keypoints {
        let has_caption = captions
            .get(image_id)
            .map(|(_, caps)| !caps.is_empty())
            .unwrap_or(false);
        if !has_caption {
            continue;
        }
        expected += anns.iter().filter(|a| a.num_keypoints >= min_kp).count();
    }
    assert_eq!(emitted, expected);
}

#[test]
fn rendered_context_never_leaks_pixel_coordinates() {
    let (captions_json, keypoints_json) = corpus();
    let captions = parse_caption_json(&captions_json).unwrap();
    let keypoints = parse_keypoint_json(&keypoints_json).unwrap();
    for ctx in build_contexts(&captions, &keypoints, 1, 3) {
        let rendered = render_context(&ctx);
        for line in rendered.text.lines().filter(|l| l.starts_with("person")) {
            for token in line
                .split(|c: char| !(c.is_ascii_digit() || c == '.'))
                .filter(|t| !t.is_empty() && t.contains('.'))
            {
                let value: f64 = token.parse().unwrap();
                assert!((0.0..=1.0).contains(&value), "pixel-scale token {token}");
            }
        }
    }
}

#[test]
fn assemble_keeps_kind_grouping_stable() {
    // Cross-check KindCounts against a BTreeMap tally.
    let samples: Vec<InstructionSample> = (0..30)
        .map(|i| {
            let m = RawImageMeta {
                image_id: i % 7,
                file_name: format!("{i}.jpg"),
                width: 10,
                height: 10,
            };
            let mut s = make_detail_sample("i", "t", &m, (i / 7) as u32).unwrap();
            s.sample_id.kind = DataKind::ALL[(i % 3) as usize];
            s
        })
        .collect();
    let (merged, counts) = assemble_samples(vec![samples]);
    let mut tally: BTreeMap<DataKind, u64> = BTreeMap::new();
    for s in &merged {
        *tally.entry(s.kind()).or_default() += 1;
    }
    for kind in DataKind::ALL {
        assert_eq!(counts.get(kind), tally.get(&kind).copied().unwrap_or(0));
    }
}
