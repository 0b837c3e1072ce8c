//! Golden-file tests freezing the context block layout, the three prompt
//! families, and the SVG overlay byte-exactly.
//!
//! Regenerate with `UPDATE_GOLDEN=1 cargo test -p poseforge-core --test
//! golden_prompts` and review the diff before committing.

use std::fs;
use std::path::PathBuf;

use poseforge_core::coco::{ImageContext, Keypoint, PersonAnnotation, RawImageMeta};
use poseforge_core::context::render_context;
use poseforge_core::overlay::{render_overlay, OverlayStyle};
use poseforge_core::prompt::{
    build_conversation_prompt, build_detail_prompt, build_reasoning_prompt, ContextMode,
    PromptAssets,
};
use poseforge_core::rng::derive_seed;

const GLOBAL_SEED: u64 = 42;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn check_golden(name: &str, actual: &str) {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing golden file {}: {e}", path.display()));
    assert_eq!(actual, expected, "output diverges from golden file {name}");
}

/// The fixture: one ski scene with five captions and two persons.
fn fixture_context() -> ImageContext {
    let keypoints_a: Vec<Keypoint> = (1..=17)
        .map(|i| {
            let v = match i {
                1..=10 => 2,
                11..=13 => 1,
                _ => 0,
            };
            if v == 0 {
                Keypoint { x: 0.0, y: 0.0, v }
            } else {
                Keypoint {
                    x: 0.05 * f64::from(i),
                    y: f64::from(i) * 16.0 / 480.0,
                    v,
                }
            }
        })
        .map(|k| Keypoint {
            x: poseforge_core::num::round_to(k.x, 3),
            y: poseforge_core::num::round_to(k.y, 3),
            v: k.v,
        })
        .collect();

    let mut keypoints_b = vec![Keypoint { x: 0.0, y: 0.0, v: 0 }; 17];
    keypoints_b[0] = Keypoint { x: 0.75, y: 0.75, v: 2 };

    ImageContext {
        image_meta: RawImageMeta {
            image_id: 185250,
            file_name: "COCO_train2014_000000185250.jpg".into(),
            width: 640,
            height: 480,
        },
        captions: vec![
            "A man in a red jacket is skiing down a snowy slope.".into(),
            "A skier leans into a sharp turn on the mountain.".into(),
            "Fresh powder sprays around a person on skis.".into(),
            "A second skier waits further down the slope.".into(),
            "Two people enjoy a day of skiing on a clear afternoon.".into(),
        ],
        persons: vec![
            PersonAnnotation {
                annotation_id: 2001,
                bbox_norm: [0.1, 0.1, 0.6, 0.9],
                keypoints_norm: keypoints_a,
            },
            PersonAnnotation {
                annotation_id: 2002,
                bbox_norm: [0.5, 0.5, 0.9, 0.9],
                keypoints_norm: keypoints_b,
            },
        ],
    }
}

fn pretty(messages: &[poseforge_core::Message]) -> String {
    let mut out = serde_json::to_string_pretty(messages).unwrap();
    out.push('\n');
    out
}

#[test]
fn context_text_matches_golden() {
    let rendered = render_context(&fixture_context());
    check_golden("context.txt", &rendered.text);
}

#[test]
fn conversation_prompt_matches_golden() {
    let ctx = render_context(&fixture_context());
    let seq = build_conversation_prompt(&ctx, &PromptAssets::builtin(), ContextMode::Combined)
        .unwrap();
    check_golden("prompt_conversation.json", &pretty(&seq.messages));
}

#[test]
fn detail_prompt_matches_golden() {
    let ctx = render_context(&fixture_context());
    let seed = derive_seed(GLOBAL_SEED, ctx.image_id);
    let seq =
        build_detail_prompt(&ctx, &PromptAssets::builtin(), ContextMode::Combined, seed).unwrap();
    check_golden("prompt_detailed_description.json", &pretty(&seq.messages));
}

#[test]
fn reasoning_prompt_matches_golden() {
    let ctx = render_context(&fixture_context());
    let seq = build_reasoning_prompt(&ctx, &PromptAssets::builtin(), ContextMode::Combined);
    check_golden("prompt_complex_reasoning.json", &pretty(&seq.messages));
}

#[test]
fn overlay_svg_matches_golden() {
    let svg = render_overlay(&fixture_context(), &OverlayStyle::default());
    check_golden("overlay.svg", &svg);
}

#[test]
fn golden_prompts_carry_the_published_phrases() {
    // Spot checks tying the goldens back to the canonical texts, independent
    // of the byte comparison above.
    let conversation = fs::read_to_string(golden_dir().join("prompt_conversation.json")).unwrap();
    assert!(conversation.contains(
        "Can you generate some new questions and answers focusing on the poses and actions of people in the image?"
    ));
    let detail =
        fs::read_to_string(golden_dir().join("prompt_detailed_description.json")).unwrap();
    for part in ["1. nose", "10. left wrist", "17. right ankle"] {
        assert!(detail.contains(&part.replace('\n', "\\n")), "missing {part}");
    }
    let reasoning =
        fs::read_to_string(golden_dir().join("prompt_complex_reasoning.json")).unwrap();
    assert!(reasoning
        .contains("**Do not include any coordinates or numerical values in your explanation**"));
    assert!(reasoning.contains("Create complex questions beyond describing the scene."));
}
