//! Benchmark construction: seeded sampling of human-centric contexts, then
//! one question of each kind per image with a reference answer generated
//! over the symbolic context (never over pixels).
//!
//! A benchmark is all-or-nothing: any image missing any of its three items
//! is a hard error, so the item count is always exactly 3x the image count.

use std::collections::BTreeMap;

use poseforge_core::bench::{item_id, sample_images, BenchmarkItem};
use poseforge_core::coco::ImageContext;
use poseforge_core::context::render_context;
use poseforge_core::kind::DataKind;
use poseforge_core::prompt::{ContextMode, PromptAssets};
use poseforge_core::sample::{parse_conversation, parse_reasoning};

use crate::backend::{ChatClient, CompletionRequest};
use crate::error::PipelineError;
use crate::generate::{build_prompt, GenerateParams};

#[derive(Debug, Clone)]
pub struct BenchParams {
    pub n: usize,
    pub seed: u64,
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub context_mode: ContextMode,
    pub max_in_flight: usize,
}

/// Derive (question, reference answer) from one teacher completion.
fn question_and_reference(
    kind: DataKind,
    instruction: &str,
    text: &str,
) -> Result<(String, String), String> {
    match kind {
        DataKind::Conversation => {
            // The first generated Q/A pair becomes the benchmark item.
            let pairs = parse_conversation(text).map_err(|e| e.to_string())?;
            let (question, answer) = pairs.into_iter().next().expect("parse yields >= 1 pair");
            Ok((question, answer))
        }
        DataKind::DetailedDescription => {
            let answer = text.trim();
            if answer.is_empty() {
                return Err("empty description".into());
            }
            Ok((instruction.to_string(), answer.to_string()))
        }
        DataKind::ComplexReasoning => {
            let output = parse_reasoning(text).map_err(|e| e.to_string())?;
            Ok((output.question, output.answer))
        }
    }
}

/// Build the benchmark over `n` seeded-sampled contexts.
pub fn build_benchmark(
    client: &ChatClient,
    contexts: &[ImageContext],
    assets: &PromptAssets,
    params: &BenchParams,
) -> Result<Vec<BenchmarkItem>, PipelineError> {
    let sampled = sample_images(contexts, params.n, params.seed)?;

    let generate_params = |kind| GenerateParams {
        kind,
        global_seed: params.seed,
        model_name: params.model_name.clone(),
        temperature: params.temperature,
        max_output_tokens: params.max_output_tokens,
        context_mode: params.context_mode,
        max_in_flight: params.max_in_flight,
    };

    // One request per (image, kind), batched together.
    let mut planned = Vec::with_capacity(sampled.len() * 3);
    for ctx in &sampled {
        for kind in DataKind::ALL {
            let prompt = build_prompt(ctx, kind, assets, params.context_mode, params.seed)?;
            let gp = generate_params(kind);
            let request = CompletionRequest::new(
                format!("{}/{}", kind.slug(), ctx.image_meta.image_id),
                prompt.messages.clone(),
                gp.model_name.clone(),
                gp.temperature,
                gp.max_output_tokens,
            );
            let instruction = prompt
                .messages
                .last()
                .map(|m| m.content.clone())
                .unwrap_or_default();
            planned.push((ctx, kind, instruction, request));
        }
    }
    let requests: Vec<CompletionRequest> = planned.iter().map(|(_, _, _, r)| r.clone()).collect();
    let batch = client.complete_batch(&requests, params.max_in_flight);

    let mut items = Vec::with_capacity(planned.len());
    let mut failures: BTreeMap<u64, Vec<String>> = BTreeMap::new();
    for (ctx, kind, instruction, request) in &planned {
        let image_id = ctx.image_meta.image_id;
        let outcome = match batch.results.get(&request.request_id) {
            Some(result) => question_and_reference(*kind, instruction, &result.text),
            None => Err(batch
                .failures
                .get(&request.request_id)
                .map(|e| e.to_string())
                .unwrap_or_else(|| "request produced no result".into())),
        };
        match outcome {
            Ok((question, reference_answer)) => items.push(BenchmarkItem {
                item_id: item_id(image_id, *kind),
                image_ref: ctx.image_meta.file_name.clone(),
                kind: *kind,
                question,
                context_text: render_context(ctx).text,
                reference_answer,
            }),
            Err(reason) => failures
                .entry(image_id)
                .or_default()
                .push(format!("{kind}: {reason}")),
        }
    }

    if !failures.is_empty() {
        // Refuse partial benchmarks: drop nothing, fail loudly.
        let failed_images = failures.len();
        let refused = items.len();
        let details = failures
            .iter()
            .map(|(id, reasons)| format!("image {id}: {}", reasons.join("; ")))
            .collect::<Vec<_>>()
            .join(" | ");
        return Err(PipelineError::IncompleteBenchmark {
            failed_images,
            refused,
            details,
        });
    }

    debug_assert_eq!(items.len(), sampled.len() * 3);
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{DiskCache, FaultKind, MockBackend, RateLimiter, RetryPolicy};
    use poseforge_core::coco::{Keypoint, PersonAnnotation, RawImageMeta};
    use std::time::Duration;

    fn contexts(n: u64) -> Vec<ImageContext> {
        (0..n)
            .map(|i| ImageContext {
                image_meta: RawImageMeta {
                    image_id: i + 1,
                    file_name: format!("{}.jpg", i + 1),
                    width: 640,
                    height: 480,
                },
                captions: vec![format!("people doing things, image {}", i + 1)],
                persons: vec![PersonAnnotation {
                    annotation_id: 500 + i,
                    bbox_norm: [0.1, 0.1, 0.6, 0.9],
                    keypoints_norm: vec![Keypoint { x: 0.4, y: 0.4, v: 2 }; 17],
                }],
            })
            .collect()
    }

    fn client(dir: &std::path::Path, backend: MockBackend) -> ChatClient {
        ChatClient::new(
            Box::new(backend),
            DiskCache::new(dir),
            RetryPolicy {
                max_attempts: 2,
                base_delay: Duration::from_millis(1),
                factor: 2,
                max_delay: Duration::from_millis(2),
                jitter: false,
            },
            RateLimiter::per_minute(None),
        )
    }

    fn params(n: usize) -> BenchParams {
        BenchParams {
            n,
            seed: 7,
            model_name: "mock-model".into(),
            temperature: 0.7,
            max_output_tokens: 256,
            context_mode: ContextMode::Combined,
            max_in_flight: 4,
        }
    }

    #[test]
    fn three_items_per_sampled_image() {
        let dir = tempfile::tempdir().unwrap();
        let client = client(dir.path(), MockBackend::new());
        let items =
            build_benchmark(&client, &contexts(6), &PromptAssets::builtin(), &params(4)).unwrap();
        assert_eq!(items.len(), 12);
        let mut per_image: BTreeMap<&str, usize> = BTreeMap::new();
        for item in &items {
            *per_image.entry(item.image_ref.as_str()).or_default() += 1;
        }
        assert!(per_image.values().all(|&n| n == 3));
        // Unique, derivable ids.
        let ids: std::collections::BTreeSet<&String> = items.iter().map(|i| &i.item_id).collect();
        assert_eq!(ids.len(), items.len());
    }

    #[test]
    fn mock_benchmark_is_reproducible() {
        let ctxs = contexts(5);
        let run = || {
            let dir = tempfile::tempdir().unwrap();
            let client = client(dir.path(), MockBackend::new());
            let items =
                build_benchmark(&client, &ctxs, &PromptAssets::builtin(), &params(3)).unwrap();
            serde_json::to_string(&items).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn one_failing_kind_rejects_whole_benchmark() {
        let dir = tempfile::tempdir().unwrap();
        let backend = MockBackend::new();
        backend.inject_fault("detailed_description/2", FaultKind::Provider, None);
        let client = client(dir.path(), backend);
        let err = build_benchmark(&client, &contexts(4), &PromptAssets::builtin(), &params(4))
            .unwrap_err();
        match err {
            PipelineError::IncompleteBenchmark { failed_images, refused, .. } => {
                assert_eq!(failed_images, 1);
                assert_eq!(refused, 11);
            }
            other => panic!("expected IncompleteBenchmark, got {other}"),
        }
    }

    #[test]
    fn oversampling_is_not_enough_images() {
        let dir = tempfile::tempdir().unwrap();
        let client = client(dir.path(), MockBackend::new());
        let err = build_benchmark(&client, &contexts(2), &PromptAssets::builtin(), &params(5))
            .unwrap_err();
        assert!(matches!(err, PipelineError::NotEnoughImages(_)));
    }
}
