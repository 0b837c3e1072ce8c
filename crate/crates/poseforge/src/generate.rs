//! The generation pipeline: contexts -> prompts -> teacher completions ->
//! validated instruction samples.
//!
//! Output order follows the input context order, never thread completion
//! order, so a mock-backend run is byte-identical across invocations.

use poseforge_core::coco::ImageContext;
use poseforge_core::context::render_context;
use poseforge_core::kind::DataKind;
use poseforge_core::prompt::{
    build_conversation_prompt, build_detail_prompt, build_reasoning_prompt, ContextMode,
    MessageSequence, PromptAssets,
};
use poseforge_core::rng::derive_seed;
use poseforge_core::sample::{
    make_conversation_sample, make_detail_sample, make_reasoning_sample, parse_conversation,
    parse_reasoning, validate_sample, InstructionSample,
};
use serde::{Deserialize, Serialize};

use crate::backend::{ChatClient, CompletionRequest};
use crate::error::PipelineError;

#[derive(Debug, Clone)]
pub struct GenerateParams {
    pub kind: DataKind,
    pub global_seed: u64,
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub context_mode: ContextMode,
    pub max_in_flight: usize,
}

/// One item that failed generation or validation; listed in diagnostics and
/// the batch report so targeted re-runs stay cheap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ItemFailure {
    pub label: String,
    pub request_id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Default)]
pub struct GenerateOutcome {
    pub samples: Vec<InstructionSample>,
    pub failures: Vec<ItemFailure>,
}

/// Build the prompt for one context under the given kind.
pub fn build_prompt(
    ctx: &ImageContext,
    kind: DataKind,
    assets: &PromptAssets,
    context_mode: ContextMode,
    global_seed: u64,
) -> Result<MessageSequence, PipelineError> {
    let rendered = render_context(ctx);
    let sequence = match kind {
        DataKind::Conversation => build_conversation_prompt(&rendered, assets, context_mode)?,
        DataKind::DetailedDescription => {
            let seed = derive_seed(global_seed, ctx.image_meta.image_id);
            build_detail_prompt(&rendered, assets, context_mode, seed)?
        }
        DataKind::ComplexReasoning => build_reasoning_prompt(&rendered, assets, context_mode),
    };
    Ok(sequence)
}

fn request_for(prompt: &MessageSequence, params: &GenerateParams) -> CompletionRequest {
    CompletionRequest::new(
        format!("{}/{}", prompt.kind.slug(), prompt.image_id),
        prompt.messages.clone(),
        params.model_name.clone(),
        params.temperature,
        params.max_output_tokens,
    )
}

/// Turn one teacher completion into a validated sample.
fn sample_from_output(
    ctx: &ImageContext,
    prompt: &MessageSequence,
    text: &str,
) -> Result<InstructionSample, String> {
    let meta = &ctx.image_meta;
    let sample = match prompt.kind {
        DataKind::Conversation => {
            let pairs = parse_conversation(text).map_err(|e| e.to_string())?;
            make_conversation_sample(&pairs, meta, 0).map_err(|e| e.to_string())?
        }
        DataKind::DetailedDescription => {
            let instruction = prompt
                .messages
                .last()
                .map(|m| m.content.as_str())
                .unwrap_or_default();
            make_detail_sample(instruction, text, meta, 0).map_err(|e| e.to_string())?
        }
        DataKind::ComplexReasoning => {
            let output = parse_reasoning(text).map_err(|e| e.to_string())?;
            if output.discarded_pairs > 0 {
                log::info!(
                    "image {}: reasoning output had {} extra pair(s), keeping the first",
                    meta.image_id,
                    output.discarded_pairs
                );
            }
            make_reasoning_sample(&output, meta, 0)
        }
    };
    let verdict = validate_sample(&sample);
    if !verdict.passed() {
        return Err(format!("validation failed: {:?}", verdict.violations));
    }
    Ok(sample)
}

/// Generate one sample per context for the configured kind. Per-item
/// failures are collected, never fatal; invalid samples are filtered out.
pub fn generate_samples(
    client: &ChatClient,
    contexts: &[ImageContext],
    assets: &PromptAssets,
    params: &GenerateParams,
) -> Result<GenerateOutcome, PipelineError> {
    let mut prompts = Vec::with_capacity(contexts.len());
    for ctx in contexts {
        let prompt = build_prompt(ctx, params.kind, assets, params.context_mode, params.global_seed)?;
        let request = request_for(&prompt, params);
        prompts.push((ctx, prompt, request));
    }

    let requests: Vec<CompletionRequest> = prompts.iter().map(|(_, _, r)| r.clone()).collect();
    let batch = client.complete_batch(&requests, params.max_in_flight);

    let mut outcome = GenerateOutcome::default();
    for (ctx, prompt, request) in &prompts {
        match batch.results.get(&request.request_id) {
            Some(result) => match sample_from_output(ctx, prompt, &result.text) {
                Ok(sample) => outcome.samples.push(sample),
                Err(reason) => outcome.failures.push(ItemFailure {
                    label: request.label.clone(),
                    request_id: Some(request.request_id.clone()),
                    reason,
                }),
            },
            None => {
                let reason = batch
                    .failures
                    .get(&request.request_id)
                    .map(|e| e.to_string())
                    .unwrap_or_else(|| "request produced no result".into());
                outcome.failures.push(ItemFailure {
                    label: request.label.clone(),
                    request_id: Some(request.request_id.clone()),
                    reason,
                });
            }
        }
    }
    Ok(outcome)
}
