//! Decimal rounding and coordinate formatting helpers.
//!
//! `f64::round` is not available in `core`, so rounding goes through an
//! integer cast. Convention is round-half-away-from-zero, matching
//! `f64::round`; the magnitudes involved (normalized coordinates, scores)
//! stay far below 2^53 after scaling, so the cast is exact.

use alloc::string::String;
use alloc::string::ToString;

const POW10: [f64; 10] = [
    1.0,
    10.0,
    100.0,
    1_000.0,
    10_000.0,
    100_000.0,
    1_000_000.0,
    10_000_000.0,
    100_000_000.0,
    1_000_000_000.0,
];

/// Round half away from zero (the `f64::round` convention).
pub fn round_half_away(x: f64) -> f64 {
    if x >= 0.0 {
        (x + 0.5) as i64 as f64
    } else {
        (x - 0.5) as i64 as f64
    }
}

/// Round `x` to `places` decimal places (0..=9).
pub fn round_to(x: f64, places: u8) -> f64 {
    let scale = POW10[usize::from(places.min(9))];
    round_half_away(x * scale) / scale
}

/// Round to one decimal place, the reporting precision for relative scores.
pub fn round1(x: f64) -> f64 {
    round_to(x, 1)
}

/// Clamp to [0, 1] then round; the normalization primitive.
pub fn clamp_unit_round(x: f64, places: u8) -> f64 {
    round_to(x.clamp(0.0, 1.0), places)
}

/// Shortest decimal form of an already-rounded coordinate, always keeping a
/// decimal point: `0.5` stays `0.5`, `0.0` renders `0.0` (not `0`).
pub fn fmt_norm(x: f64) -> String {
    let mut s = x.to_string();
    if !s.contains('.') {
        s.push_str(".0");
    }
    s
}
