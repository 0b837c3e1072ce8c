//! Judge evaluation: score candidate answers against references and compute
//! per-kind and overall relative scores.

use std::collections::BTreeMap;

use poseforge_core::bench::BenchmarkItem;
use poseforge_core::kind::DataKind;
use poseforge_core::prompt::Message;
use poseforge_core::scoring::{
    build_judge_messages, parse_verdict_text, score_by_kind, EvaluationReport, JudgeVerdict,
    ScoreError, ScoreMethod, JUDGE_FORMAT_REMINDER,
};
use serde::{Deserialize, Serialize};

use crate::backend::{ChatClient, CompletionRequest};
use crate::error::PipelineError;
use crate::generate::ItemFailure;

#[derive(Debug, Clone)]
pub struct JudgeParams {
    pub candidate_name: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub max_in_flight: usize,
    /// Judge each item a second time with answer positions swapped; both
    /// verdicts enter the report.
    pub position_swap: bool,
    pub method: ScoreMethod,
}

/// One line of the candidate-answer file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateAnswer {
    pub item_id: String,
    pub answer: String,
}

#[derive(Debug)]
pub struct JudgeOutcome {
    pub report: EvaluationReport,
    pub failures: Vec<ItemFailure>,
}

fn judge_request(
    item: &BenchmarkItem,
    candidate_answer: &str,
    judge_system: &str,
    params: &JudgeParams,
    swap: bool,
) -> CompletionRequest {
    let messages = build_judge_messages(
        judge_system,
        &item.context_text,
        &item.question,
        &item.reference_answer,
        candidate_answer,
        swap,
    );
    let label = if swap {
        format!("judge/{}/swap", item.item_id)
    } else {
        format!("judge/{}", item.item_id)
    };
    CompletionRequest::new(
        label,
        messages,
        params.model_name.clone(),
        params.temperature,
        params.max_output_tokens,
    )
}

/// Parse a judge reply; on failure, re-ask once with the format reminder
/// appended to the original conversation.
fn verdict_with_retry(
    client: &ChatClient,
    request: &CompletionRequest,
    reply_text: &str,
    item_id: &str,
    swap: bool,
) -> Result<JudgeVerdict, String> {
    match parse_verdict_text(item_id, reply_text) {
        Ok(verdict) => Ok(normalize_swap(verdict, swap)),
        Err(ScoreError::UnparseableVerdict) => {
            let mut messages = request.messages.clone();
            messages.push(Message::assistant(reply_text));
            messages.push(Message::user(JUDGE_FORMAT_REMINDER));
            let retry = CompletionRequest::new(
                format!("{}/retry", request.label),
                messages,
                request.model_name.clone(),
                request.temperature,
                request.max_output_tokens,
            );
            let result = client.complete(&retry).map_err(|e| e.to_string())?;
            parse_verdict_text(item_id, &result.text)
                .map(|v| normalize_swap(v, swap))
                .map_err(|e| format!("verdict unparseable after format reminder: {e}"))
        }
        Err(other) => Err(other.to_string()),
    }
}

/// With swapped positions, Answer 1 was the candidate; put scores back in
/// reference-first order.
fn normalize_swap(verdict: JudgeVerdict, swap: bool) -> JudgeVerdict {
    if swap {
        JudgeVerdict {
            score_candidate: verdict.score_reference,
            score_reference: verdict.score_candidate,
            ..verdict
        }
    } else {
        verdict
    }
}

/// Judge one candidate's answers over the whole benchmark.
pub fn evaluate_candidate(
    client: &ChatClient,
    benchmark: &[BenchmarkItem],
    answers: &BTreeMap<String, String>,
    judge_system: &str,
    judge_template_hash: &str,
    params: &JudgeParams,
) -> Result<JudgeOutcome, PipelineError> {
    let mut failures = Vec::new();
    let mut planned = Vec::new();
    for item in benchmark {
        let Some(answer) = answers.get(&item.item_id).filter(|a| !a.trim().is_empty()) else {
            failures.push(ItemFailure {
                label: format!("judge/{}", item.item_id),
                request_id: None,
                reason: "candidate answer missing or empty".into(),
            });
            continue;
        };
        planned.push((item, judge_request(item, answer, judge_system, params, false), false));
        if params.position_swap {
            planned.push((item, judge_request(item, answer, judge_system, params, true), true));
        }
    }

    let requests: Vec<CompletionRequest> = planned.iter().map(|(_, r, _)| r.clone()).collect();
    let batch = client.complete_batch(&requests, params.max_in_flight);

    let mut by_kind: BTreeMap<DataKind, Vec<JudgeVerdict>> =
        DataKind::ALL.iter().map(|&k| (k, Vec::new())).collect();
    let mut n_items: BTreeMap<DataKind, u64> = BTreeMap::new();
    let mut verdicts = Vec::new();

    for (item, request, swap) in &planned {
        let outcome = match batch.results.get(&request.request_id) {
            Some(result) => verdict_with_retry(client, request, &result.text, &item.item_id, *swap),
            None => Err(batch
                .failures
                .get(&request.request_id)
                .map(|e| e.to_string())
                .unwrap_or_else(|| "request produced no result".into())),
        };
        match outcome {
            Ok(verdict) => {
                by_kind.get_mut(&item.kind).expect("all kinds present").push(verdict.clone());
                *n_items.entry(item.kind).or_default() += 1;
                verdicts.push(verdict);
            }
            Err(reason) => failures.push(ItemFailure {
                label: request.label.clone(),
                request_id: Some(request.request_id.clone()),
                reason,
            }),
        }
    }

    let (per_kind_relative, overall) = score_by_kind(&by_kind, params.method)?;
    verdicts.sort_by(|a, b| a.item_id.cmp(&b.item_id));

    Ok(JudgeOutcome {
        report: EvaluationReport {
            candidate_name: params.candidate_name.clone(),
            method: params.method,
            per_kind_relative,
            overall,
            n_items,
            judge_model: params.model_name.clone(),
            judge_temperature: params.temperature,
            judge_template_hash: judge_template_hash.to_string(),
            verdicts,
        },
        failures,
    })
}
