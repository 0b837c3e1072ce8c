//! Parsing teacher-model output into validated instruction samples in the
//! conversation JSON interchange format.
//!
//! Wire schema per sample: `{"id", "image", "conversations": [{"from":
//! "human"|"gpt", "value": ...}]}` with the image placeholder token opening
//! the first human value. The sample kind is not a wire field; it is encoded
//! in (and recovered from) the sample id.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coco::RawImageMeta;
use crate::kind::DataKind;

/// Image placeholder token consumed by external trainers.
pub const IMAGE_PLACEHOLDER: &str = "<image>";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("no question/answer pairs found in teacher output")]
    UnparseableOutput,
    #[error("question without a matching answer")]
    DanglingQuestion,
    #[error("teacher output is empty")]
    EmptyOutput,
    #[error("sample id {0:?} is not of the form <image_id>-<kind>-<ordinal>")]
    BadSampleId(String),
}

/// Identity of one sample: source image, data kind, ordinal within the
/// (image, kind) group. Renders as `<image_id>-<kind>-<ordinal>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SampleId {
    pub image_id: u64,
    pub kind: DataKind,
    pub ordinal: u32,
}

impl fmt::Display for SampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}", self.image_id, self.kind.slug(), self.ordinal)
    }
}

impl FromStr for SampleId {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseError::BadSampleId(s.to_string());
        let (image_part, rest) = s.split_once('-').ok_or_else(bad)?;
        let (kind_part, ordinal_part) = rest.rsplit_once('-').ok_or_else(bad)?;
        Ok(SampleId {
            image_id: image_part.parse().map_err(|_| bad())?,
            kind: kind_part.parse().map_err(|_| bad())?,
            ordinal: ordinal_part.parse().map_err(|_| bad())?,
        })
    }
}

/// Speaker of one conversation turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Human,
    Gpt,
}

/// One turn; serializes as `{"from": ..., "value": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    #[serde(rename = "from")]
    pub speaker: Speaker,
    #[serde(rename = "value")]
    pub text: String,
}

/// One training sample in the conversation interchange format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WireSample", into = "WireSample")]
pub struct InstructionSample {
    pub sample_id: SampleId,
    pub image_ref: String,
    pub turns: Vec<Turn>,
}

impl InstructionSample {
    pub fn kind(&self) -> DataKind {
        self.sample_id.kind
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct WireSample {
    id: String,
    image: String,
    conversations: Vec<Turn>,
}

impl From<InstructionSample> for WireSample {
    fn from(s: InstructionSample) -> Self {
        WireSample {
            id: s.sample_id.to_string(),
            image: s.image_ref,
            conversations: s.turns,
        }
    }
}

impl TryFrom<WireSample> for InstructionSample {
    type Error = ParseError;

    fn try_from(w: WireSample) -> Result<Self, Self::Error> {
        Ok(InstructionSample {
            sample_id: w.id.parse()?,
            image_ref: w.image,
            turns: w.conversations,
        })
    }
}

// ---------------------------------------------------------------------------
// Teacher-output parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LabelKind {
    Question,
    Answer,
}

/// Match a `Question:` / `Answer:` / `Q:` / `A:` label, case-insensitive,
/// with an optional number (`Question 1:`, `Q2:`). Returns the label kind
/// and the text after the colon.
fn match_label(line: &str) -> Option<(LabelKind, &str)> {
    let trimmed = line.trim_start();
    for (word, kind) in [
        ("question", LabelKind::Question),
        ("answer", LabelKind::Answer),
        ("q", LabelKind::Question),
        ("a", LabelKind::Answer),
    ] {
        let Some(mut rest) = strip_prefix_ci(trimmed, word) else {
            continue;
        };
        rest = rest.trim_start();
        let digits = rest.len() - rest.trim_start_matches(|c: char| c.is_ascii_digit()).len();
        rest = &rest[digits..];
        if let Some(content) = rest.strip_prefix(':') {
            return Some((kind, content.trim()));
        }
    }
    None
}

fn strip_prefix_ci<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    if s.len() >= prefix.len() && s[..prefix.len()].eq_ignore_ascii_case(prefix) {
        Some(&s[prefix.len()..])
    } else {
        None
    }
}

/// Split labeled teacher output into (question, answer) segments. Unlabeled
/// lines attach to the current segment; consecutive same-kind labels fold
/// into one segment.
fn parse_labeled_pairs(raw: &str) -> Result<Vec<(String, String)>, ParseError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut current: Option<(LabelKind, String)> = None;
    let mut pending_question: Option<String> = None;

    let commit = |current: &mut Option<(LabelKind, String)>,
                      pending: &mut Option<String>,
                      pairs: &mut Vec<(String, String)>|
     -> Result<(), ParseError> {
        if let Some((kind, text)) = current.take() {
            let text = text.trim().to_string();
            match kind {
                LabelKind::Question => {
                    if pending.is_some() {
                        return Err(ParseError::DanglingQuestion);
                    }
                    *pending = Some(text);
                }
                LabelKind::Answer => {
                    let question = pending.take().ok_or(ParseError::UnparseableOutput)?;
                    pairs.push((question, text));
                }
            }
        }
        Ok(())
    };

    for line in raw.lines() {
        match match_label(line) {
            Some((kind, content)) => {
                if let Some((open_kind, text)) = &mut current {
                    if *open_kind == kind {
                        // Fold consecutive same-kind labels into one segment.
                        text.push('\n');
                        text.push_str(content);
                        continue;
                    }
                }
                commit(&mut current, &mut pending_question, &mut pairs)?;
                current = Some((kind, content.to_string()));
            }
            None => {
                if let Some((_, text)) = &mut current {
                    text.push('\n');
                    text.push_str(line);
                }
                // Prose before the first label is discarded.
            }
        }
    }
    commit(&mut current, &mut pending_question, &mut pairs)?;

    if pending_question.is_some() {
        return Err(ParseError::DanglingQuestion);
    }
    if pairs.is_empty() {
        return Err(ParseError::UnparseableOutput);
    }
    if pairs.iter().any(|(q, a)| q.is_empty() || a.is_empty()) {
        return Err(ParseError::UnparseableOutput);
    }
    Ok(pairs)
}

/// Extract the question/answer pairs from conversation-prompt output.
pub fn parse_conversation(raw: &str) -> Result<Vec<(String, String)>, ParseError> {
    parse_labeled_pairs(raw)
}

/// Parsed complex-reasoning output: exactly one pair is kept; any extras are
/// counted so the caller can log them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReasoningOutput {
    pub question: String,
    pub answer: String,
    pub discarded_pairs: usize,
}

/// Extract the single question/answer pair from reasoning-prompt output.
/// When the teacher produced several pairs the first is kept.
pub fn parse_reasoning(raw: &str) -> Result<ReasoningOutput, ParseError> {
    let mut pairs = parse_labeled_pairs(raw)?;
    let discarded_pairs = pairs.len() - 1;
    let (question, answer) = pairs.swap_remove(0);
    Ok(ReasoningOutput {
        question,
        answer,
        discarded_pairs,
    })
}

// ---------------------------------------------------------------------------
// Sample construction
// ---------------------------------------------------------------------------

fn placeholder_turn(text: &str) -> String {
    alloc::format!("{IMAGE_PLACEHOLDER}\n{text}")
}

/// Build a two-turn detailed-description sample: the chosen instruction as
/// the human turn, the teacher's description (whitespace-trimmed) as the gpt
/// turn.
pub fn make_detail_sample(
    instruction: &str,
    raw: &str,
    image: &RawImageMeta,
    ordinal: u32,
) -> Result<InstructionSample, ParseError> {
    let text = raw.trim();
    if text.is_empty() {
        return Err(ParseError::EmptyOutput);
    }
    Ok(InstructionSample {
        sample_id: SampleId {
            image_id: image.image_id,
            kind: DataKind::DetailedDescription,
            ordinal,
        },
        image_ref: image.file_name.clone(),
        turns: alloc::vec![
            Turn {
                speaker: Speaker::Human,
                text: placeholder_turn(instruction),
            },
            Turn {
                speaker: Speaker::Gpt,
                text: text.to_string(),
            },
        ],
    })
}

/// Build one multi-turn conversation sample from parsed Q/A pairs. All pairs
/// stay in a single sample; the placeholder opens the first human turn.
pub fn make_conversation_sample(
    pairs: &[(String, String)],
    image: &RawImageMeta,
    ordinal: u32,
) -> Result<InstructionSample, ParseError> {
    if pairs.is_empty() {
        return Err(ParseError::UnparseableOutput);
    }
    let mut turns = Vec::with_capacity(pairs.len() * 2);
    for (i, (question, answer)) in pairs.iter().enumerate() {
        let human = if i == 0 {
            placeholder_turn(question)
        } else {
            question.clone()
        };
        turns.push(Turn { speaker: Speaker::Human, text: human });
        turns.push(Turn { speaker: Speaker::Gpt, text: answer.clone() });
    }
    Ok(InstructionSample {
        sample_id: SampleId {
            image_id: image.image_id,
            kind: DataKind::Conversation,
            ordinal,
        },
        image_ref: image.file_name.clone(),
        turns,
    })
}

/// Build a two-turn complex-reasoning sample from a parsed pair.
pub fn make_reasoning_sample(
    output: &ReasoningOutput,
    image: &RawImageMeta,
    ordinal: u32,
) -> InstructionSample {
    InstructionSample {
        sample_id: SampleId {
            image_id: image.image_id,
            kind: DataKind::ComplexReasoning,
            ordinal,
        },
        image_ref: image.file_name.clone(),
        turns: alloc::vec![
            Turn {
                speaker: Speaker::Human,
                text: placeholder_turn(&output.question),
            },
            Turn {
                speaker: Speaker::Gpt,
                text: output.answer.clone(),
            },
        ],
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// One invariant violation found by [`validate_sample`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "violation")]
pub enum Violation {
    TooFewTurns { count: usize },
    OddTurnCount { count: usize },
    NotAlternating { index: usize },
    MissingImagePlaceholder,
    EmptyTurn { index: usize },
    CoordinateLeakage { index: usize },
}

/// Validation outcome: empty violation list means the sample is well-formed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationVerdict {
    pub violations: Vec<Violation>,
}

impl ValidationVerdict {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every structural invariant plus the coordinate-leakage scan. Never
/// fails; returns the list of violations found.
///
/// The leakage scan applies to detailed-description and complex-reasoning
/// samples only — those prompt families forbid coordinates in the output;
/// conversation prompts carry no such prohibition.
pub fn validate_sample(sample: &InstructionSample) -> ValidationVerdict {
    let mut violations = Vec::new();
    let turns = &sample.turns;

    if turns.len() < 2 {
        violations.push(Violation::TooFewTurns { count: turns.len() });
    }
    if turns.len() % 2 != 0 {
        violations.push(Violation::OddTurnCount { count: turns.len() });
    }
    for (i, turn) in turns.iter().enumerate() {
        let expected = if i % 2 == 0 { Speaker::Human } else { Speaker::Gpt };
        if turn.speaker != expected {
            violations.push(Violation::NotAlternating { index: i });
        }
        if turn.text.trim().is_empty() {
            violations.push(Violation::EmptyTurn { index: i });
        }
    }
    match turns.first() {
        Some(first) if !first.text.starts_with(&alloc::format!("{IMAGE_PLACEHOLDER}\n")) => {
            violations.push(Violation::MissingImagePlaceholder);
        }
        _ => {}
    }

    let scan_leakage = matches!(
        sample.kind(),
        DataKind::DetailedDescription | DataKind::ComplexReasoning
    );
    if scan_leakage {
        for (i, turn) in turns.iter().enumerate() {
            if turn.speaker == Speaker::Gpt && contains_coordinate_tuple(&turn.text) {
                violations.push(Violation::CoordinateLeakage { index: i });
            }
        }
    }

    ValidationVerdict { violations }
}

/// Detect coordinate-looking tuples such as `(0.34, 0.57` — an opening
/// parenthesis followed by two comma-separated normalized-range decimals.
pub fn contains_coordinate_tuple(text: &str) -> bool {
    let bytes = text.as_bytes();
    let mut i = 0;
    while let Some(offset) = text[i..].find('(') {
        let start = i + offset + 1;
        if scan_coordinate_pair(&bytes[start..]) {
            return true;
        }
        i = start;
    }
    false
}

fn scan_coordinate_pair(bytes: &[u8]) -> bool {
    let Some(rest) = scan_normalized_decimal(bytes) else {
        return false;
    };
    let rest = skip_spaces(rest);
    let Some(rest) = rest.strip_prefix(b",") else {
        return false;
    };
    let rest = skip_spaces(rest);
    scan_normalized_decimal(rest).is_some()
}

/// Match `0.<digits>` or `1.<digits>` (normalized coordinates live in [0, 1]).
fn scan_normalized_decimal(bytes: &[u8]) -> Option<&[u8]> {
    let first = *bytes.first()?;
    if first != b'0' && first != b'1' {
        return None;
    }
    let rest = bytes[1..].strip_prefix(b".")?;
    let digits = rest.iter().take_while(|b| b.is_ascii_digit()).count();
    if digits == 0 {
        return None;
    }
    Some(&rest[digits..])
}

fn skip_spaces(bytes: &[u8]) -> &[u8] {
    let n = bytes.iter().take_while(|&&b| b == b' ').count();
    &bytes[n..]
}
