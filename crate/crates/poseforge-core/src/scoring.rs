//! Judge-verdict parsing and relative-score aggregation.
//!
//! The judge scores a reference answer and a candidate answer 1-10; a
//! category's relative score is `100 x mean(candidate) / mean(reference)`,
//! reported to one decimal. The overall score is the arithmetic mean of the
//! three per-kind relative scores.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::kind::DataKind;
use crate::num::round1;
use crate::prompt::Message;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScoreError {
    #[error("judge output does not start with two integer scores in 1..=10")]
    UnparseableVerdict,
    #[error("no verdicts to aggregate")]
    EmptyVerdicts,
    #[error("per-kind scores missing kind {0}")]
    MissingKind(DataKind),
    #[error("baseline score must be positive")]
    NonpositiveBase,
}

/// One judged benchmark item: both scores plus the judge's explanation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub item_id: String,
    pub score_candidate: u8,
    pub score_reference: u8,
    pub explanation: String,
}

/// Parse raw judge output: first line is `<reference> <candidate>`, both in
/// 1..=10; everything after the first line is the explanation.
pub fn parse_verdict_text(item_id: &str, text: &str) -> Result<JudgeVerdict, ScoreError> {
    let mut lines = text.trim_start().lines();
    let first = lines.next().ok_or(ScoreError::UnparseableVerdict)?;
    let mut parts = first.split_whitespace();
    let reference = parse_score(parts.next())?;
    let candidate = parse_score(parts.next())?;
    if parts.next().is_some() {
        return Err(ScoreError::UnparseableVerdict);
    }
    let explanation = text
        .trim_start()
        .split_once('\n')
        .map(|(_, rest)| rest.trim())
        .unwrap_or("");
    Ok(JudgeVerdict {
        item_id: String::from(item_id),
        score_candidate: candidate,
        score_reference: reference,
        explanation: String::from(explanation),
    })
}

fn parse_score(token: Option<&str>) -> Result<u8, ScoreError> {
    let value: u8 = token
        .ok_or(ScoreError::UnparseableVerdict)?
        .parse()
        .map_err(|_| ScoreError::UnparseableVerdict)?;
    if (1..=10).contains(&value) {
        Ok(value)
    } else {
        Err(ScoreError::UnparseableVerdict)
    }
}

/// Relative score of a verdict list: `100 x mean(candidate) / mean(reference)`,
/// one decimal.
pub fn relative_score(verdicts: &[JudgeVerdict]) -> Result<f64, ScoreError> {
    if verdicts.is_empty() {
        return Err(ScoreError::EmptyVerdicts);
    }
    let cand: u64 = verdicts.iter().map(|v| u64::from(v.score_candidate)).sum();
    let reference: u64 = verdicts.iter().map(|v| u64::from(v.score_reference)).sum();
    // Scores are validated into 1..=10 at parse time, so the mean reference
    // score cannot be zero.
    debug_assert!(reference > 0);
    Ok(round1(100.0 * cand as f64 / reference as f64))
}

/// Alternative aggregation for sensitivity analysis: mean over per-item
/// ratios `100 x candidate / reference`, one decimal.
pub fn relative_score_mean_of_ratios(verdicts: &[JudgeVerdict]) -> Result<f64, ScoreError> {
    if verdicts.is_empty() {
        return Err(ScoreError::EmptyVerdicts);
    }
    let sum: f64 = verdicts
        .iter()
        .map(|v| 100.0 * f64::from(v.score_candidate) / f64::from(v.score_reference))
        .sum();
    Ok(round1(sum / verdicts.len() as f64))
}

/// Overall score: arithmetic mean of the three per-kind relative scores,
/// one decimal.
pub fn aggregate(per_kind: &BTreeMap<DataKind, f64>) -> Result<f64, ScoreError> {
    let mut sum = 0.0;
    for kind in DataKind::ALL {
        sum += per_kind.get(&kind).copied().ok_or(ScoreError::MissingKind(kind))?;
    }
    Ok(round1(sum / 3.0))
}

/// Relative improvement of `new` over `base`: `100 x (new - base) / base`,
/// one decimal.
pub fn improvement(new: f64, base: f64) -> Result<f64, ScoreError> {
    if base <= 0.0 {
        return Err(ScoreError::NonpositiveBase);
    }
    Ok(round1(100.0 * (new - base) / base))
}

/// Which per-kind aggregation produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMethod {
    RatioOfMeans,
    MeanOfRatios,
}

/// Per-item verdicts plus per-kind and overall relative scores for one
/// candidate model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub candidate_name: String,
    pub method: ScoreMethod,
    pub per_kind_relative: BTreeMap<DataKind, f64>,
    pub overall: f64,
    pub n_items: BTreeMap<DataKind, u64>,
    pub judge_model: String,
    pub judge_temperature: f64,
    /// Hash of the judge prompt template in effect.
    pub judge_template_hash: String,
    pub verdicts: Vec<JudgeVerdict>,
}

/// Compute per-kind and overall relative scores from verdicts grouped by
/// kind.
pub fn score_by_kind(
    by_kind: &BTreeMap<DataKind, Vec<JudgeVerdict>>,
    method: ScoreMethod,
) -> Result<(BTreeMap<DataKind, f64>, f64), ScoreError> {
    let mut per_kind = BTreeMap::new();
    for kind in DataKind::ALL {
        let verdicts = by_kind.get(&kind).ok_or(ScoreError::MissingKind(kind))?;
        let score = match method {
            ScoreMethod::RatioOfMeans => relative_score(verdicts)?,
            ScoreMethod::MeanOfRatios => relative_score_mean_of_ratios(verdicts)?,
        };
        per_kind.insert(kind, score);
    }
    let overall = aggregate(&per_kind)?;
    Ok((per_kind, overall))
}

// ---------------------------------------------------------------------------
// Judge prompt
// ---------------------------------------------------------------------------

/// Default judge system prompt. Shipped as an editable asset; its hash is
/// recorded in every report.
pub const JUDGE_SYSTEM: &str = "You are a fair and impartial judge of answer quality. You will be shown the textual context of an image (captions, person bounding boxes, and human keypoints), a question about the human poses and actions in that image, and two answers: Answer 1 and Answer 2. Evaluate each answer on a scale of 1 to 10, considering helpfulness, relevance, accuracy, and detail level, using the context as ground truth.

On the first line of your reply, output exactly two integers separated by a single space: the score for Answer 1, then the score for Answer 2. From the second line onward, explain your scores.";

/// Reminder appended when the judge's first reply fails to parse.
pub const JUDGE_FORMAT_REMINDER: &str = "Your previous reply did not follow the required format. Reply again: the first line must contain exactly two integers between 1 and 10 separated by a single space (score for Answer 1, then score for Answer 2), followed by your explanation on the following lines.";

/// Build the judge conversation. Answer 1 is the reference and Answer 2 the
/// candidate unless `swap` is set, which reverses their positions (the
/// caller must then swap the parsed scores back).
pub fn build_judge_messages(
    system_text: &str,
    context_text: &str,
    question: &str,
    reference_answer: &str,
    candidate_answer: &str,
    swap: bool,
) -> Vec<Message> {
    let (first, second) = if swap {
        (candidate_answer, reference_answer)
    } else {
        (reference_answer, candidate_answer)
    };
    let material = alloc::format!(
        "[Context]\n{context_text}\n\n[Question]\n{question}\n\n[Answer 1]\n{first}\n\n[Answer 2]\n{second}"
    );
    alloc::vec![Message::system(system_text), Message::user(material)]
}

/// Render rows as a plain-text table in the benchmark's column layout.
pub fn render_score_table(rows: &[(String, BTreeMap<DataKind, f64>, f64)]) -> String {
    let mut width = "Model".len();
    for (name, _, _) in rows {
        width = width.max(name.len());
    }
    let mut out = alloc::format!(
        "{:<width$} | Conversation | Detailed description | Complex reasoning | All\n",
        "Model",
    );
    out.push_str(&alloc::format!("{}\n", "-".repeat(width + 66)));
    for (name, per_kind, overall) in rows {
        out.push_str(&alloc::format!(
            "{:<width$} | {:>12.1} | {:>20.1} | {:>17.1} | {:>5.1}\n",
            name,
            per_kind.get(&DataKind::Conversation).copied().unwrap_or(0.0),
            per_kind.get(&DataKind::DetailedDescription).copied().unwrap_or(0.0),
            per_kind.get(&DataKind::ComplexReasoning).copied().unwrap_or(0.0),
            overall,
        ));
    }
    out
}
