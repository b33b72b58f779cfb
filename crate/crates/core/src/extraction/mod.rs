//! Constituent labeling of filtered candidates and MID record filling.

mod frames;
mod mid;
mod pipeline;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use frames::{analyze_sentence, label_constituents};
pub use mid::{fill_template, read_mid, write_mid_jsonl, write_mid_tsv, MidEntry, EXISTENTIAL};
pub use pipeline::{build_mid, ExtractedEntry, FilterStage, Pipeline, ProcessedSentence, SentenceOutcome};

use crate::corpus::SentenceRef;
use crate::patterns::TriggerMatch;
use crate::tagger::Chunk;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstituentLabel {
    Autonym,
    Agent,
    MarkerOperator,
    Anaphoric,
    NounChunk,
    InfoSegment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    NameConferral,
    NameBearing,
    Unassigned,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frame::NameConferral => "NameConferral",
            Frame::NameBearing => "NameBearing",
            Frame::Unassigned => "Unassigned",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    AnaphoricUnresolved,
    ExistentialPlaceholder,
    Sortal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmoAnalysis {
    pub sentence_ref: SentenceRef,
    pub matched: TriggerMatch,
    /// Labeled spans; slot spans that cover several chunks appear as one
    /// synthetic chunk.
    pub labeled_chunks: Vec<(Chunk, ConstituentLabel)>,
    pub frame: Frame,
    pub flags: BTreeSet<Flag>,
}

impl EmoAnalysis {
    pub fn spans(&self, label: ConstituentLabel) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.labeled_chunks
            .iter()
            .filter(move |(_, l)| *l == label)
            .map(|(c, _)| c.span)
    }

    /// Token indices labeled as marker material.
    pub fn marker_tokens(&self) -> BTreeSet<usize> {
        self.spans(ConstituentLabel::MarkerOperator).flat_map(|(a, b)| a..=b).collect()
    }
}
