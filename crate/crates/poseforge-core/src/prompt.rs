//! Construction of the three teacher-prompt families as ordered message
//! sequences: conversation, detailed description, and complex reasoning.
//!
//! The system texts and the 16-instruction pool below are the canonical
//! prompt assets; golden files in `tests/golden/` freeze the assembled
//! sequences byte-exactly. Asset contents are user-editable through the
//! companion crate's assets directory, with hashes recorded in the dataset
//! manifest.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::context::ContextText;
use crate::kind::DataKind;
use crate::rng::SplitMix64;

/// Chat role of one message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

/// One role-tagged message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }
    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }
    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

/// An assembled prompt: the ordered messages plus the provenance needed to
/// regenerate it (kind, image, seed when randomness was used).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageSequence {
    pub kind: DataKind,
    pub image_id: u64,
    pub messages: Vec<Message>,
    /// Seed consumed by the detail-instruction choice; `None` when the
    /// builder used no randomness.
    pub rng_seed: Option<u64>,
}

/// One few-shot demonstration: a context the assistant was shown and the
/// response it should have produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShotSample {
    pub context: String,
    pub response: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("missing prompt assets: {0}")]
    MissingAssets(String),
}

/// How per-image context text enters the prompt: one combined user message,
/// or one user message per section (captions, then each person block).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContextMode {
    #[default]
    Combined,
    PerSection,
}

// ---------------------------------------------------------------------------
// Canonical prompt assets
// ---------------------------------------------------------------------------

/// System prompt for multi-turn conversation generation.
pub const CONVERSATION_SYSTEM: &str = "You are an AI visual assistant, and you are seeing a single image. What you see are provided with five sentences, describing the same image you are looking at. Answer all questions as you are seeing the image.

Design a conversation between you and a person asking about this photo. The answers should be in a tone that a visual AI assistant is seeing the image and answering the question. Ask diverse questions and give corresponding answers.

Your primary focus should be on generating questions and answers about the poses, actions, and movements of people in the image. Please generate diverse questions that relate primarily to human poses and actions, and provide detailed answers as if you are seeing the image. Only include questions that have definite answers:
(1) one can see the content in the image that the question asks about and can answer confidently;
(2) one can determine confidently from the image that it is not in the image. Do not ask any question that cannot be answered confidently.";

/// Closing user turn of every conversation prompt.
pub const CONVERSATION_CLOSING: &str = "Can you generate some new questions and answers focusing on the poses and actions of people in the image?";

/// System prompt for detailed description generation, including the 17-part
/// keypoint legend.
pub const DETAIL_SYSTEM: &str = "You are an AI visual assistant specializing in analyzing human poses and actions in images. You receive five sentences, each describing the same image you are observing. In addition, specific object locations within the image are given, along with detailed coordinates. These coordinates are in the form of bounding boxes and human keypoints, represented as (x1, y1, x2, y2) for bounding boxes and (x, y, visibility) for keypoints, with floating numbers ranging from 0 to 1. These values correspond to the top left x, top left y, bottom right x, and bottom right y for bounding boxes, and x, y coordinates along with visibility (0: not labeled, 1: labeled but not visible, 2: labeled and visible) for keypoints.

The keypoints represent the following body parts:
1. nose
2. left eye
3. right eye
4. left ear
5. right ear
6. left shoulder
7. right shoulder
8. left elbow
9. right elbow
10. left wrist
11. right wrist
12. left hip
13. right hip
14. left knee
15. right knee
16. left ankle
17. right ankle

Using the provided captions and bounding box/human keypoint information, describe the scene in a detailed manner, focusing on the human poses and actions.

Instead of directly mentioning the bounding box or keypoint coordinates, utilize this data to explain the scene using natural language. Include details like the number of people, their actions, poses, interactions, and relative positions.

When using the information from the caption and coordinates, directly explain the scene, and do not mention that the information source is the caption or the bounding box/keypoints. Always answer as if you are directly looking at the image.";

/// System prompt for complex reasoning generation.
pub const REASONING_SYSTEM: &str = "You are an AI visual assistant specializing in analyzing human poses and actions in images. You receive five sentences, each describing the same image you are observing. In addition, specific object locations within the image are given, along with detailed coordinates. These coordinates are in the form of bounding boxes and human keypoints, represented as (x1, y1, x2, y2) for bounding boxes and (x, y, visibility) for human keypoints, with floating numbers ranging from 0 to 1. These values correspond to the top left x, top left y, bottom right x, and bottom right y for bounding boxes, and x, y coordinates along with visibility (0: not labeled, 1: labeled but not visible, 2: labeled and visible) for human keypoints.

The human keypoints represent the following body parts:
1. nose
2. left eye
3. right eye
4. left ear
5. right ear
6. left shoulder
7. right shoulder
8. left elbow
9. right elbow
10. left wrist
11. right wrist
12. left hip
13. right hip
14. left knee
15. right knee
16. left ankle
17. right ankle

The task is to use the provided caption and bounding box/human keypoint information to create a plausible question about the human poses and actions in the image, and provide the answer in detail.

Create complex questions beyond describing the scene. To answer such questions, one should require first understanding the human poses and actions, then based on the background knowledge or reasoning, either explain why the actions are happening that way, or provide guidance and help to the user's request. Make the question challenging by not including the visual content details in the question so that the user needs to reason about that first.

**Do not include any coordinates or numerical values in your explanation**. Instead, utilize the data to explain the scene using natural language. Include details like the number of people, their actions, poses, interactions, relative positions, as well as the relationships and interactions between people and objects in the scene. Describe how people are using objects, their proximity to objects, and any activities involving both people and objects.

When using the information from the caption and coordinates, directly explain the scene, and do not mention that the information source is the caption or the bounding box/human keypoints. Always answer as if you are directly looking at the image.";

/// The 16-entry instruction pool for detailed description prompts.
pub const DETAIL_INSTRUCTIONS: [&str; 16] = [
    "Describe the actions and poses of people in the following image in detail.",
    "Provide a detailed description of the poses of people in the given image.",
    "Explain the various details of the actions of people you see in the image.",
    "Share a comprehensive analysis of the behaviors of people presented in the image.",
    "Offer a thorough analysis of the actions of people in the image.",
    "Explain the various poses and actions of people in the displayed image with great detail.",
    "Characterize the poses of people in the image using a well-detailed description.",
    "Break down the actions of people in the image in a detailed manner.",
    "Walk through the important details of the actions of people in the image.",
    "Portray the poses and actions of people in the image with a rich, descriptive narrative.",
    "Narrate the actions and poses of people in the image with precision.",
    "Analyze the poses and actions of people in the image in a comprehensive and detailed manner.",
    "Illustrate the actions and poses of people in the image through a descriptive explanation.",
    "Examine the actions and poses of people in the image closely and share their details.",
    "Write an exhaustive depiction of the actions of people in the given image.",
    "Carefully observe the people in the image and share the details of their poses and actions.",
];

/// The loaded, possibly user-edited prompt assets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptAssets {
    pub conversation_system: String,
    pub detail_system: String,
    pub reasoning_system: String,
    pub detail_instructions: Vec<String>,
    pub fewshot_samples: Vec<FewShotSample>,
}

impl PromptAssets {
    /// The built-in assets: canonical system texts, the 16-instruction pool,
    /// and two hand-written few-shot demonstrations.
    pub fn builtin() -> Self {
        use alloc::string::ToString;
        Self {
            conversation_system: CONVERSATION_SYSTEM.to_string(),
            detail_system: DETAIL_SYSTEM.to_string(),
            reasoning_system: REASONING_SYSTEM.to_string(),
            detail_instructions: DETAIL_INSTRUCTIONS.iter().map(|s| s.to_string()).collect(),
            fewshot_samples: builtin_fewshot_samples(),
        }
    }
}

fn builtin_fewshot_samples() -> Vec<FewShotSample> {
    use alloc::string::ToString;
    alloc::vec![
        FewShotSample {
            context: "A man is skiing down a snowy slope, leaning forward with knees bent.\nA skier in a red jacket carves a turn on fresh powder.\nA person on skis moves quickly past a row of pine trees.\nThe skier keeps both arms out to the sides for balance.\nSnow sprays up around a skier making a sharp turn."
                .to_string(),
            response: "Question: What is the person in the image doing?\nAnswer: The person is skiing down a snowy slope. They are leaning forward with their knees bent and arms held out to the sides, a posture that keeps them balanced while carving a turn at speed.\nQuestion: How can you tell the skier is turning rather than going straight?\nAnswer: The skier's body is angled into the slope and snow is spraying out from the edges of the skis, which happens when the skis are tilted to carve a sharp turn rather than gliding straight downhill."
                .to_string(),
        },
        FewShotSample {
            context: "Two children play soccer on a grass field.\nA boy kicks a ball while another child runs behind him.\nKids in bright uniforms chase a soccer ball.\nA young player plants one foot and swings the other leg at the ball.\nChildren enjoy a soccer game in a sunny park."
                .to_string(),
            response: "Question: How many people are playing, and what are they doing?\nAnswer: There are two children playing soccer. One boy is in the middle of kicking the ball, with one foot planted on the grass and the other leg swinging forward, while the second child runs behind him to keep up with the play.\nQuestion: Is either child standing still?\nAnswer: No. Both children are in motion: the kicker is balanced on one leg mid-kick, and the other child is running, so neither of them is standing still."
                .to_string(),
        },
    ]
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

fn push_context(messages: &mut Vec<Message>, ctx: &ContextText, mode: ContextMode) {
    match mode {
        ContextMode::Combined => messages.push(Message::user(ctx.text.clone())),
        ContextMode::PerSection => {
            for section in &ctx.sections {
                messages.push(Message::user(section.clone()));
            }
        }
    }
}

/// Build a conversation prompt: system text, few-shot user/assistant pairs,
/// the image context, then the fixed closing question.
pub fn build_conversation_prompt(
    ctx: &ContextText,
    assets: &PromptAssets,
    mode: ContextMode,
) -> Result<MessageSequence, PromptError> {
    if assets.fewshot_samples.is_empty() {
        return Err(PromptError::MissingAssets(
            "few-shot samples file absent or empty".into(),
        ));
    }
    let mut messages = Vec::with_capacity(3 + 2 * assets.fewshot_samples.len());
    messages.push(Message::system(assets.conversation_system.clone()));
    for sample in &assets.fewshot_samples {
        messages.push(Message::user(sample.context.clone()));
        messages.push(Message::assistant(sample.response.clone()));
    }
    push_context(&mut messages, ctx, mode);
    messages.push(Message::user(CONVERSATION_CLOSING));
    Ok(MessageSequence {
        kind: DataKind::Conversation,
        image_id: ctx.image_id,
        messages,
        rng_seed: None,
    })
}

/// Build a detailed-description prompt: system text, the image context, then
/// one instruction chosen uniformly from the 16-entry pool by `rng_seed`.
pub fn build_detail_prompt(
    ctx: &ContextText,
    assets: &PromptAssets,
    mode: ContextMode,
    rng_seed: u64,
) -> Result<MessageSequence, PromptError> {
    if assets.detail_instructions.len() != 16 {
        return Err(PromptError::MissingAssets(alloc::format!(
            "instruction pool has {} entries, expected 16",
            assets.detail_instructions.len()
        )));
    }
    let index = choose_detail_instruction(rng_seed, assets.detail_instructions.len());
    let mut messages = Vec::with_capacity(3);
    messages.push(Message::system(assets.detail_system.clone()));
    push_context(&mut messages, ctx, mode);
    messages.push(Message::user(assets.detail_instructions[index].clone()));
    Ok(MessageSequence {
        kind: DataKind::DetailedDescription,
        image_id: ctx.image_id,
        messages,
        rng_seed: Some(rng_seed),
    })
}

/// Index into the instruction pool for a given seed. Exposed so callers can
/// recover which instruction a recorded seed selected.
pub fn choose_detail_instruction(rng_seed: u64, pool_len: usize) -> usize {
    SplitMix64::new(rng_seed).next_below(pool_len as u64) as usize
}

/// Build a complex-reasoning prompt: system text then the image context; the
/// loop ends on context, no trailing instruction.
pub fn build_reasoning_prompt(
    ctx: &ContextText,
    assets: &PromptAssets,
    mode: ContextMode,
) -> MessageSequence {
    let mut messages = Vec::with_capacity(2);
    messages.push(Message::system(assets.reasoning_system.clone()));
    push_context(&mut messages, ctx, mode);
    MessageSequence {
        kind: DataKind::ComplexReasoning,
        image_id: ctx.image_id,
        messages,
        rng_seed: None,
    }
}
