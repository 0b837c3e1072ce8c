//! Merging per-kind sample streams into one dataset: deduplication, canonical
//! ordering, statistics, and the reproducibility manifest.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::kind::DataKind;
use crate::num::round1;
use crate::sample::InstructionSample;

/// Paper-scale per-kind target counts for a full COCO train run.
pub const TARGET_CONVERSATION: u64 = 112_980;
pub const TARGET_DETAILED_DESCRIPTION: u64 = 45_174;
pub const TARGET_COMPLEX_REASONING: u64 = 42_174;
pub const TARGET_TOTAL: u64 = 200_328;

/// Per-kind sample counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KindCounts {
    pub conversation: u64,
    pub detailed_description: u64,
    pub complex_reasoning: u64,
}

impl KindCounts {
    pub fn get(&self, kind: DataKind) -> u64 {
        match kind {
            DataKind::Conversation => self.conversation,
            DataKind::DetailedDescription => self.detailed_description,
            DataKind::ComplexReasoning => self.complex_reasoning,
        }
    }

    pub fn bump(&mut self, kind: DataKind) {
        match kind {
            DataKind::Conversation => self.conversation += 1,
            DataKind::DetailedDescription => self.detailed_description += 1,
            DataKind::ComplexReasoning => self.complex_reasoning += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.conversation + self.detailed_description + self.complex_reasoning
    }

    /// Percentage share per kind, one decimal.
    pub fn ratios_percent(&self) -> [f64; 3] {
        let total = self.total();
        if total == 0 {
            return [0.0; 3];
        }
        [
            round1(100.0 * self.conversation as f64 / total as f64),
            round1(100.0 * self.detailed_description as f64 / total as f64),
            round1(100.0 * self.complex_reasoning as f64 / total as f64),
        ]
    }

    pub fn paper_targets() -> Self {
        KindCounts {
            conversation: TARGET_CONVERSATION,
            detailed_description: TARGET_DETAILED_DESCRIPTION,
            complex_reasoning: TARGET_COMPLEX_REASONING,
        }
    }
}

/// Sidecar metadata that makes a dataset reproducible: seeds, precision,
/// asset hashes, and model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub counts: KindCounts,
    pub total: u64,
    pub global_seed: u64,
    pub precision: u8,
    pub asset_hashes: BTreeMap<String, String>,
    pub model_name: String,
    pub temperature: f64,
    pub created_at: String,
}

/// Merge sample streams: duplicates by sample id removed (first occurrence
/// wins), output sorted by (image id, kind, ordinal).
pub fn assemble_samples(streams: Vec<Vec<InstructionSample>>) -> (Vec<InstructionSample>, KindCounts) {
    let mut seen = BTreeSet::new();
    let mut merged = Vec::new();
    for stream in streams {
        for sample in stream {
            if seen.insert(sample.sample_id) {
                merged.push(sample);
            }
        }
    }
    merged.sort_by_key(|s| (s.sample_id.image_id, s.sample_id.kind, s.sample_id.ordinal));
    let mut counts = KindCounts::default();
    for sample in &merged {
        counts.bump(sample.kind());
    }
    (merged, counts)
}

/// Dataset statistics, including the paper-scale targets for comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub counts: KindCounts,
    pub total: u64,
    pub distinct_images: u64,
    /// Mean number of turns per sample, by kind (0 when the kind is absent).
    pub mean_turns: BTreeMap<DataKind, f64>,
    /// Mean gpt-turn length in characters, by kind.
    pub mean_gpt_chars: BTreeMap<DataKind, f64>,
    /// Achieved per-kind percentage split.
    pub achieved_ratio_percent: [f64; 3],
    /// The documented paper-scale targets, for reference only.
    pub paper_target: PaperTarget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperTarget {
    pub counts: KindCounts,
    pub total: u64,
    pub ratio_percent: [f64; 3],
}

impl PaperTarget {
    pub fn new() -> Self {
        let counts = KindCounts::paper_targets();
        PaperTarget {
            total: counts.total(),
            ratio_percent: counts.ratios_percent(),
            counts,
        }
    }
}

impl Default for PaperTarget {
    fn default() -> Self {
        Self::new()
    }
}

/// Compute dataset statistics in one pass.
pub fn compute_stats(samples: &[InstructionSample]) -> DatasetStats {
    let mut counts = KindCounts::default();
    let mut images = BTreeSet::new();
    let mut turn_sums: BTreeMap<DataKind, u64> = BTreeMap::new();
    let mut gpt_chars: BTreeMap<DataKind, u64> = BTreeMap::new();
    let mut gpt_turns: BTreeMap<DataKind, u64> = BTreeMap::new();

    for sample in samples {
        let kind = sample.kind();
        counts.bump(kind);
        images.insert(sample.sample_id.image_id);
        *turn_sums.entry(kind).or_default() += sample.turns.len() as u64;
        for turn in &sample.turns {
            if turn.speaker == crate::sample::Speaker::Gpt {
                *gpt_chars.entry(kind).or_default() += turn.text.chars().count() as u64;
                *gpt_turns.entry(kind).or_default() += 1;
            }
        }
    }

    let mut mean_turns = BTreeMap::new();
    let mut mean_gpt_chars = BTreeMap::new();
    for kind in DataKind::ALL {
        let n = counts.get(kind);
        mean_turns.insert(
            kind,
            if n == 0 {
                0.0
            } else {
                round1(turn_sums.get(&kind).copied().unwrap_or(0) as f64 / n as f64)
            },
        );
        let gt = gpt_turns.get(&kind).copied().unwrap_or(0);
        mean_gpt_chars.insert(
            kind,
            if gt == 0 {
                0.0
            } else {
                round1(gpt_chars.get(&kind).copied().unwrap_or(0) as f64 / gt as f64)
            },
        );
    }

    DatasetStats {
        total: counts.total(),
        distinct_images: images.len() as u64,
        achieved_ratio_percent: counts.ratios_percent(),
        counts,
        mean_turns,
        mean_gpt_chars,
        paper_target: PaperTarget::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coco::RawImageMeta;
    use crate::sample::make_detail_sample;
    use alloc::vec;

    fn sample(image_id: u64, kind: DataKind, ordinal: u32) -> InstructionSample {
        let meta = RawImageMeta {
            image_id,
            file_name: alloc::format!("{image_id}.jpg"),
            width: 10,
            height: 10,
        };
        let mut s = make_detail_sample("Describe.", "Some text here.", &meta, ordinal).unwrap();
        s.sample_id.kind = kind;
        s
    }

    #[test]
    fn paper_count_identity() {
        assert_eq!(
            TARGET_CONVERSATION + TARGET_DETAILED_DESCRIPTION + TARGET_COMPLEX_REASONING,
            TARGET_TOTAL
        );
        assert_eq!(KindCounts::paper_targets().total(), 200_328);
        // 45174/200328 is 22.55002%, which rounds to 22.6 at one decimal.
        assert_eq!(
            KindCounts::paper_targets().ratios_percent(),
            [56.4, 22.6, 21.1]
        );
    }

    #[test]
    fn duplicates_removed_first_wins() {
        let a = sample(1, DataKind::Conversation, 0);
        let mut a_dup = sample(1, DataKind::Conversation, 0);
        a_dup.turns[1].text = "different".into();
        let streams = vec![
            vec![a.clone(), sample(2, DataKind::Conversation, 0)],
            vec![a_dup, sample(3, DataKind::DetailedDescription, 0)],
            vec![sample(1, DataKind::ComplexReasoning, 0), sample(4, DataKind::Conversation, 0)],
        ];
        let (merged, counts) = assemble_samples(streams);
        assert_eq!(merged.len(), 5);
        assert_eq!(counts.total(), 5);
        // First occurrence wins.
        assert_eq!(merged[0].turns[1].text, "Some text here.");
    }

    #[test]
    fn empty_inputs_give_empty_dataset() {
        let (merged, counts) = assemble_samples(vec![vec![], vec![]]);
        assert!(merged.is_empty());
        assert_eq!(counts.total(), 0);
    }

    #[test]
    fn sorted_by_image_kind_ordinal() {
        let streams = vec![vec![
            sample(2, DataKind::Conversation, 0),
            sample(1, DataKind::ComplexReasoning, 0),
            sample(1, DataKind::Conversation, 1),
            sample(1, DataKind::Conversation, 0),
        ]];
        let (merged, _) = assemble_samples(streams);
        let ids: Vec<String> = merged.iter().map(|s| s.sample_id.to_string()).collect();
        assert_eq!(
            ids,
            vec![
                "1-conversation-0",
                "1-conversation-1",
                "1-complex_reasoning-0",
                "2-conversation-0",
            ]
        );
    }

    #[test]
    fn stats_match_hand_count() {
        let samples = vec![
            sample(1, DataKind::Conversation, 0),
            sample(1, DataKind::DetailedDescription, 0),
            sample(2, DataKind::Conversation, 0),
            sample(2, DataKind::ComplexReasoning, 0),
            sample(3, DataKind::Conversation, 0),
        ];
        let stats = compute_stats(&samples);
        assert_eq!(stats.counts.conversation, 3);
        assert_eq!(stats.counts.detailed_description, 1);
        assert_eq!(stats.counts.complex_reasoning, 1);
        assert_eq!(stats.total, 5);
        assert_eq!(stats.distinct_images, 3);
        assert_eq!(stats.mean_turns[&DataKind::Conversation], 2.0);
        // "Some text here." is 15 characters.
        assert_eq!(stats.mean_gpt_chars[&DataKind::Conversation], 15.0);
    }

    #[test]
    fn stats_report_zero_for_absent_kinds() {
        let samples = vec![sample(1, DataKind::Conversation, 0)];
        let stats = compute_stats(&samples);
        assert_eq!(stats.counts.detailed_description, 0);
        assert_eq!(stats.mean_turns[&DataKind::ComplexReasoning], 0.0);
        assert_eq!(stats.mean_gpt_chars[&DataKind::DetailedDescription], 0.0);
    }
}
