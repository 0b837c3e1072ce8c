//! COCO caption and person-keypoint annotation parsing, joining, and
//! geometry normalization.
//!
//! Parsers here take JSON text; reading files and attaching paths to errors
//! is the companion crate's job. Bounding boxes arrive as `[x, y, w, h]` in
//! pixels and leave as `(x1, y1, x2, y2)` normalized to [0, 1]; keypoints
//! arrive as 17 `(x_px, y_px, v)` triples and leave normalized likewise,
//! with the visibility flag copied bit-exactly.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::num::clamp_unit_round;

/// Number of keypoints per person annotation.
pub const KEYPOINT_COUNT: usize = 17;

/// Flat length of a raw COCO keypoint array: 17 × (x, y, v).
pub const KEYPOINT_ARITY: usize = KEYPOINT_COUNT * 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CocoError {
    /// JSON or schema violation; carries the parser's own description of the
    /// offending key or token.
    #[error("malformed file: {0}")]
    MalformedFile(String),
    #[error("duplicate image id {0}")]
    DuplicateImageId(u64),
    #[error("annotation {annotation_id}: keypoint array has {len} entries, expected {KEYPOINT_ARITY}")]
    BadKeypointArity { annotation_id: u64, len: usize },
    #[error("annotation {annotation_id}: visibility flag {value} outside {{0, 1, 2}}")]
    BadVisibility { annotation_id: u64, value: i64 },
    #[error("annotation {annotation_id}: negative bbox extent")]
    NegativeBbox { annotation_id: u64 },
    #[error("image {image_id}: non-positive dimensions {width}x{height}")]
    BadDimensions { image_id: u64, width: i64, height: i64 },
}

/// Image identity as stored in COCO: id, file name, pixel dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawImageMeta {
    pub image_id: u64,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
}

/// One person annotation straight from the keypoints file, still in pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawPersonAnnotation {
    pub annotation_id: u64,
    pub image_id: u64,
    /// COCO order: top-left x, top-left y, width, height.
    pub bbox_xywh: [f64; 4],
    /// Flat 51-entry array of 17 × (x_px, y_px, v).
    pub keypoints_raw: Vec<f64>,
    /// COCO's count of labeled keypoints (v > 0).
    pub num_keypoints: u32,
}

/// A normalized keypoint. Serializes as the `[x, y, v]` triple used by the
/// contexts file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64, u8)", into = "(f64, f64, u8)")]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub v: u8,
}

impl From<(f64, f64, u8)> for Keypoint {
    fn from((x, y, v): (f64, f64, u8)) -> Self {
        Self { x, y, v }
    }
}

impl From<Keypoint> for (f64, f64, u8) {
    fn from(k: Keypoint) -> Self {
        (k.x, k.y, k.v)
    }
}

/// One person with normalized geometry: bbox corners and 17 keypoints, all
/// coordinates in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonAnnotation {
    pub annotation_id: u64,
    /// (x1, y1, x2, y2), normalized, x1 <= x2 and y1 <= y2.
    pub bbox_norm: [f64; 4],
    pub keypoints_norm: Vec<Keypoint>,
}

impl PersonAnnotation {
    /// Count of keypoints that are labeled (v > 0).
    pub fn labeled_keypoints(&self) -> usize {
        self.keypoints_norm.iter().filter(|k| k.v > 0).count()
    }
}

/// Per-image bundle of captions and normalized person annotations — the unit
/// everything downstream consumes. Serializes to the flat contexts-file
/// schema `{image_id, file_name, width, height, captions, persons}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageContext {
    #[serde(flatten)]
    pub image_meta: RawImageMeta,
    pub captions: Vec<String>,
    pub persons: Vec<PersonAnnotation>,
}

// ---------------------------------------------------------------------------
// COCO wire schema (internal)
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
struct CaptionFile {
    images: Vec<WireImage>,
    annotations: Vec<WireCaption>,
}

#[derive(Debug, Deserialize)]
struct WireImage {
    id: u64,
    file_name: String,
    width: i64,
    height: i64,
}

#[derive(Debug, Deserialize)]
struct WireCaption {
    image_id: u64,
    caption: String,
}

#[derive(Debug, Deserialize)]
struct KeypointFile {
    annotations: Vec<WireKeypointAnnotation>,
}

#[derive(Debug, Deserialize)]
struct WireKeypointAnnotation {
    id: u64,
    image_id: u64,
    bbox: [f64; 4],
    keypoints: Vec<f64>,
    #[serde(default)]
    num_keypoints: Option<u32>,
    #[serde(default)]
    iscrowd: u8,
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Parse a COCO captions JSON document into `image_id -> (meta, captions)`.
///
/// Images with zero captions are retained with an empty list; captions whose
/// `image_id` points at no declared image are a schema violation.
pub fn parse_caption_json(
    json: &str,
) -> Result<BTreeMap<u64, (RawImageMeta, Vec<String>)>, CocoError> {
    let file: CaptionFile =
        serde_json::from_str(json).map_err(|e| CocoError::MalformedFile(err_string(&e)))?;

    let mut by_image: BTreeMap<u64, (RawImageMeta, Vec<String>)> = BTreeMap::new();
    for img in file.images {
        if img.width <= 0 || img.height <= 0 {
            return Err(CocoError::BadDimensions {
                image_id: img.id,
                width: img.width,
                height: img.height,
            });
        }
        let meta = RawImageMeta {
            image_id: img.id,
            file_name: img.file_name,
            width: img.width as u32,
            height: img.height as u32,
        };
        if by_image.insert(img.id, (meta, Vec::new())).is_some() {
            return Err(CocoError::DuplicateImageId(img.id));
        }
    }
    for ann in file.annotations {
        let Some((_, captions)) = by_image.get_mut(&ann.image_id) else {
            return Err(CocoError::MalformedFile(alloc::format!(
                "caption references unknown image_id {}",
                ann.image_id
            )));
        };
        captions.push(ann.caption);
    }
    Ok(by_image)
}

/// Parse a COCO person-keypoints JSON document into
/// `image_id -> [RawPersonAnnotation]`.
///
/// Crowd annotations (`iscrowd = 1`) are skipped — they carry no usable
/// per-person keypoints. Malformed keypoint arrays are rejected outright.
pub fn parse_keypoint_json(
    json: &str,
) -> Result<BTreeMap<u64, Vec<RawPersonAnnotation>>, CocoError> {
    let file: KeypointFile =
        serde_json::from_str(json).map_err(|e| CocoError::MalformedFile(err_string(&e)))?;

    let mut by_image: BTreeMap<u64, Vec<RawPersonAnnotation>> = BTreeMap::new();
    for ann in file.annotations {
        if ann.iscrowd != 0 {
            continue;
        }
        if ann.keypoints.len() != KEYPOINT_ARITY {
            return Err(CocoError::BadKeypointArity {
                annotation_id: ann.id,
                len: ann.keypoints.len(),
            });
        }
        let mut labeled = 0u32;
        for triple in ann.keypoints.chunks_exact(3) {
            let v = triple[2];
            if v != 0.0 && v != 1.0 && v != 2.0 {
                return Err(CocoError::BadVisibility {
                    annotation_id: ann.id,
                    value: v as i64,
                });
            }
            if v > 0.0 {
                labeled += 1;
            }
        }
        if ann.bbox[2] < 0.0 || ann.bbox[3] < 0.0 {
            return Err(CocoError::NegativeBbox {
                annotation_id: ann.id,
            });
        }
        by_image
            .entry(ann.image_id)
            .or_default()
            .push(RawPersonAnnotation {
                annotation_id: ann.id,
                image_id: ann.image_id,
                bbox_xywh: ann.bbox,
                keypoints_raw: ann.keypoints,
                // Trust the file when present; recount otherwise.
                num_keypoints: ann.num_keypoints.unwrap_or(labeled),
            });
    }
    Ok(by_image)
}

fn err_string(e: &serde_json::Error) -> String {
    use alloc::string::ToString;
    e.to_string()
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

/// Normalize one person annotation into [0, 1] coordinates.
///
/// Bbox `(x, y, w, h)` becomes `(x/W, y/H, (x+w)/W, (y+h)/H)`; keypoints are
/// divided likewise. Every coordinate is clamped to [0, 1] (real COCO boxes
/// can overrun image borders) and then rounded to `precision` decimals.
/// Unlabeled keypoints (v = 0) map to exactly `(0.0, 0.0, 0)` per the COCO
/// zero convention; visibility flags are copied unchanged.
pub fn normalize_person(
    raw: &RawPersonAnnotation,
    meta: &RawImageMeta,
    precision: u8,
) -> PersonAnnotation {
    debug_assert!(meta.width > 0 && meta.height > 0);
    let w = f64::from(meta.width);
    let h = f64::from(meta.height);
    let [bx, by, bw, bh] = raw.bbox_xywh;

    let bbox_norm = [
        clamp_unit_round(bx / w, precision),
        clamp_unit_round(by / h, precision),
        clamp_unit_round((bx + bw) / w, precision),
        clamp_unit_round((by + bh) / h, precision),
    ];

    let keypoints_norm = raw
        .keypoints_raw
        .chunks_exact(3)
        .map(|triple| {
            let v = triple[2] as u8;
            if v == 0 {
                Keypoint { x: 0.0, y: 0.0, v: 0 }
            } else {
                Keypoint {
                    x: clamp_unit_round(triple[0] / w, precision),
                    y: clamp_unit_round(triple[1] / h, precision),
                    v,
                }
            }
        })
        .collect();

    PersonAnnotation {
        annotation_id: raw.annotation_id,
        bbox_norm,
        keypoints_norm,
    }
}

/// Join captions and keypoint annotations into human-centric image contexts.
///
/// An image is emitted when it has at least one caption and at least one
/// person with `num_keypoints >= min_labeled_keypoints`; only persons passing
/// that threshold are kept. Output is sorted by image id ascending, persons
/// by annotation id ascending.
pub fn build_contexts(
    captions: &BTreeMap<u64, (RawImageMeta, Vec<String>)>,
    keypoints: &BTreeMap<u64, Vec<RawPersonAnnotation>>,
    min_labeled_keypoints: u32,
    precision: u8,
) -> Vec<ImageContext> {
    let mut contexts = Vec::new();
    for (image_id, (meta, caps)) in captions {
        if caps.is_empty() {
            continue;
        }
        let Some(anns) = keypoints.get(image_id) else {
            continue;
        };
        let mut persons: Vec<PersonAnnotation> = anns
            .iter()
            .filter(|a| a.num_keypoints >= min_labeled_keypoints)
            .map(|a| normalize_person(a, meta, precision))
            .collect();
        if persons.is_empty() {
            continue;
        }
        persons.sort_by_key(|p| p.annotation_id);
        contexts.push(ImageContext {
            image_meta: meta.clone(),
            captions: caps.clone(),
            persons,
        });
    }
    // BTreeMap iteration already yields ascending image ids.
    contexts
}
