//! poseforge-core: sans-IO core for keypoint-integrated instruction data.
//!
//! Turns COCO-style captions and person-keypoint annotations into symbolic
//! text contexts, builds the three teacher-prompt families (conversation,
//! detailed description, complex reasoning), parses teacher output back into
//! training samples, and scores candidate answers against references with
//! judge-based relative scoring.
//!
//! This crate has **no I/O dependencies** — it operates on in-memory strings
//! and returns structured data. File formats, the chat backend, and the CLI
//! live in the `poseforge` companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod assemble;
pub mod bench;
pub mod coco;
pub mod context;
pub mod kind;
pub mod num;
pub mod overlay;
pub mod prompt;
pub mod rng;
pub mod sample;
pub mod scoring;

pub use coco::{ImageContext, Keypoint, PersonAnnotation, RawImageMeta, RawPersonAnnotation};
pub use context::{body_part_name, render_context, ContextText, BODY_PART_NAMES};
pub use kind::DataKind;
pub use prompt::{Message, MessageSequence, PromptAssets, Role};
pub use sample::{InstructionSample, Speaker, Turn};
