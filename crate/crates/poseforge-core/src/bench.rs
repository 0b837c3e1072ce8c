//! Benchmark construction primitives: seeded image sampling and item
//! identity. Generating the actual questions and reference answers needs a
//! chat backend and lives in the companion crate.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::coco::ImageContext;
use crate::kind::DataKind;
use crate::rng::{sample_indices, SplitMix64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("requested {requested} images but only {available} contexts are available")]
pub struct NotEnoughImages {
    pub requested: usize,
    pub available: usize,
}

/// One benchmark question: the question text, the symbolic context it was
/// generated from, and the reference answer produced over that context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkItem {
    pub item_id: String,
    pub image_ref: String,
    pub kind: DataKind,
    pub question: String,
    pub context_text: String,
    pub reference_answer: String,
}

/// Stable item id derived from (image, kind).
pub fn item_id(image_id: u64, kind: DataKind) -> String {
    alloc::format!("{image_id}-{}", kind.slug())
}

/// Uniform sample of `n` contexts without replacement, deterministic for a
/// given seed; output sorted by image id ascending.
pub fn sample_images(
    contexts: &[ImageContext],
    n: usize,
    seed: u64,
) -> Result<Vec<ImageContext>, NotEnoughImages> {
    if n > contexts.len() {
        return Err(NotEnoughImages {
            requested: n,
            available: contexts.len(),
        });
    }
    let mut rng = SplitMix64::new(seed);
    let mut picked = sample_indices(&mut rng, contexts.len(), n);
    picked.sort_by_key(|&i| contexts[i].image_meta.image_id);
    Ok(picked.into_iter().map(|i| contexts[i].clone()).collect())
}
