//! Static SVG overlays of bounding boxes and keypoint markers, for
//! spot-checking contexts against the source images.
//!
//! The image is referenced by file name as an external href, never embedded,
//! so no pixel decoding happens anywhere in the pipeline. Visible keypoints
//! (v = 2) draw as solid circles; labeled-but-occluded ones (v = 1) draw
//! hollow so they can be told apart; unlabeled ones (v = 0) are omitted.

use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::coco::ImageContext;
use crate::context::BODY_PART_NAMES;

/// Marker and stroke styling for the overlay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayStyle {
    pub box_stroke_width: f64,
    pub marker_radius: f64,
    pub marker_color: String,
    pub show_labels: bool,
}

impl Default for OverlayStyle {
    fn default() -> Self {
        Self {
            box_stroke_width: 2.0,
            marker_radius: 4.0,
            marker_color: String::from("green"),
            show_labels: false,
        }
    }
}

fn px(value: f64) -> String {
    alloc::format!("{value:.2}")
}

fn xml_escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Render one image context as an SVG document string.
///
/// Bounding boxes and keypoints are denormalized back to pixel space via the
/// image dimensions. Pure and deterministic.
pub fn render_overlay(ctx: &ImageContext, style: &OverlayStyle) -> String {
    debug_assert!(style.marker_radius > 0.0 && style.box_stroke_width > 0.0);
    let w = f64::from(ctx.image_meta.width);
    let h = f64::from(ctx.image_meta.height);
    let color = xml_escape(&style.marker_color);

    let mut svg = alloc::format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        ctx.image_meta.width, ctx.image_meta.height, ctx.image_meta.width, ctx.image_meta.height
    );
    svg.push_str(&alloc::format!(
        "  <image xlink:href=\"{}\" x=\"0\" y=\"0\" width=\"{}\" height=\"{}\"/>\n",
        xml_escape(&ctx.image_meta.file_name),
        ctx.image_meta.width,
        ctx.image_meta.height
    ));

    for person in &ctx.persons {
        let [x1, y1, x2, y2] = person.bbox_norm;
        svg.push_str(&alloc::format!(
            "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"/>\n",
            px(x1 * w),
            px(y1 * h),
            px((x2 - x1) * w),
            px((y2 - y1) * h),
            color,
            px(style.box_stroke_width),
        ));
        for (i, k) in person.keypoints_norm.iter().enumerate() {
            if k.v == 0 {
                continue;
            }
            let cx = k.x * w;
            let cy = k.y * h;
            // v=2 solid, v=1 hollow.
            let fill = if k.v == 2 { color.as_str() } else { "none" };
            svg.push_str(&alloc::format!(
                "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\" stroke=\"{}\" stroke-width=\"1\"/>\n",
                px(cx),
                px(cy),
                px(style.marker_radius),
                fill,
                color,
            ));
            if style.show_labels {
                svg.push_str(&alloc::format!(
                    "  <text x=\"{}\" y=\"{}\" font-size=\"10\" fill=\"{}\">{}</text>\n",
                    px(cx + style.marker_radius + 2.0),
                    px(cy),
                    color,
                    xml_escape(BODY_PART_NAMES[i.min(BODY_PART_NAMES.len() - 1)]),
                ));
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}
