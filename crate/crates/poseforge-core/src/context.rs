//! Rendering an [`ImageContext`] into the textual context block that prompts
//! the teacher model.
//!
//! Layout is canonical and frozen by golden files: captions one per line,
//! then per person (ascending annotation id) a `person: (x1, y1, x2, y2)`
//! line followed by a `person keypoints: (x, y, v), ...` line with the 17
//! triples in canonical body-part order. Only normalized values ever appear;
//! raw pixel coordinates never leak into prompts.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::coco::ImageContext;
use crate::num::fmt_norm;

/// The 17 canonical body parts, in keypoint order.
pub const BODY_PART_NAMES: [&str; 17] = [
    "nose",
    "left eye",
    "right eye",
    "left ear",
    "right ear",
    "left shoulder",
    "right shoulder",
    "left elbow",
    "right elbow",
    "left wrist",
    "right wrist",
    "left hip",
    "right hip",
    "left knee",
    "right knee",
    "left ankle",
    "right ankle",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("body part index {0} out of range 1..=17")]
pub struct IndexOutOfRange(pub usize);

/// Canonical name of keypoint `index` (1-based, 1..=17).
pub fn body_part_name(index: usize) -> Result<&'static str, IndexOutOfRange> {
    if (1..=17).contains(&index) {
        Ok(BODY_PART_NAMES[index - 1])
    } else {
        Err(IndexOutOfRange(index))
    }
}

/// A rendered context block for one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextText {
    pub image_id: u64,
    /// The full block; equals `sections` joined with newlines.
    pub text: String,
    /// The captions block followed by one block per person, for the
    /// one-user-message-per-section prompt mode.
    pub sections: Vec<String>,
}

/// Render the context block for an image.
///
/// Pure and deterministic: equal inputs yield byte-identical output.
pub fn render_context(ctx: &ImageContext) -> ContextText {
    let mut sections = Vec::with_capacity(1 + ctx.persons.len());
    sections.push(ctx.captions.join("\n"));

    // Persons arrive sorted by annotation_id from build_contexts; re-sorting
    // here keeps rendering order-independent of the caller.
    let mut order: Vec<usize> = (0..ctx.persons.len()).collect();
    order.sort_by_key(|&i| ctx.persons[i].annotation_id);

    for i in order {
        let person = &ctx.persons[i];
        let [x1, y1, x2, y2] = person.bbox_norm;
        let mut block = alloc::format!(
            "person: ({}, {}, {}, {})\n",
            fmt_norm(x1),
            fmt_norm(y1),
            fmt_norm(x2),
            fmt_norm(y2)
        );
        block.push_str("person keypoints: ");
        for (j, k) in person.keypoints_norm.iter().enumerate() {
            if j > 0 {
                block.push_str(", ");
            }
            block.push_str(&alloc::format!(
                "({}, {}, {})",
                fmt_norm(k.x),
                fmt_norm(k.y),
                k.v
            ));
        }
        sections.push(block);
    }

    ContextText {
        image_id: ctx.image_meta.image_id,
        text: sections.join("\n"),
        sections,
    }
}
