//! The three instruction-data categories shared across the pipeline.

use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

/// Category of generated instruction data: multi-turn conversation, detailed
/// description, or complex reasoning. Ordering matches the canonical dataset
/// sort order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    Conversation,
    DetailedDescription,
    ComplexReasoning,
}

impl DataKind {
    pub const ALL: [DataKind; 3] = [
        DataKind::Conversation,
        DataKind::DetailedDescription,
        DataKind::ComplexReasoning,
    ];

    /// Stable identifier used in sample ids, file names, and reports.
    pub fn slug(self) -> &'static str {
        match self {
            DataKind::Conversation => "conversation",
            DataKind::DetailedDescription => "detailed_description",
            DataKind::ComplexReasoning => "complex_reasoning",
        }
    }

    /// Human-readable column label, as printed in score tables.
    pub fn label(self) -> &'static str {
        match self {
            DataKind::Conversation => "Conversation",
            DataKind::DetailedDescription => "Detailed description",
            DataKind::ComplexReasoning => "Complex reasoning",
        }
    }
}

impl fmt::Display for DataKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for DataKind {
    type Err = UnknownKind;

    /// Accepts the full slug and the short CLI aliases `detail` / `reasoning`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "conversation" => Ok(DataKind::Conversation),
            "detailed_description" | "detail" => Ok(DataKind::DetailedDescription),
            "complex_reasoning" | "reasoning" => Ok(DataKind::ComplexReasoning),
            _ => Err(UnknownKind),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("unknown data kind (expected conversation|detail|reasoning)")]
pub struct UnknownKind;
