use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{ConstituentLabel, EmoAnalysis, Flag};
use crate::corpus::Sentence;
use crate::error::{Error, Result};

/// Placeholder for a slot with no filler in the sentence.
pub const EXISTENTIAL: &str = "$x";

/// One record of the metalinguistic information database.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MidEntry {
    pub reference: String,
    pub autonym: String,
    pub information: String,
    pub markers: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub flags: BTreeSet<Flag>,
    pub confidence: f64,
}

fn render(sentence: &Sentence, spans: impl Iterator<Item = (usize, usize)>) -> Option<String> {
    let mut spans: Vec<_> = spans.collect();
    if spans.is_empty() {
        return None;
    }
    spans.sort();
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for (a, b) in spans {
        match merged.last_mut() {
            Some(last) if a <= last.1 + 1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    Some(
        merged
            .iter()
            .map(|&(a, b)| sentence.slice(a, b))
            .collect::<Vec<_>>()
            .join(" "),
    )
}

/// Fills the record for one analysis; `counter` is the per-document record number.
pub fn fill_template(analysis: &EmoAnalysis, sentence: &Sentence, counter: usize, confidence: f64) -> MidEntry {
    let slot = |labels: &[ConstituentLabel]| {
        render(
            sentence,
            analysis
                .labeled_chunks
                .iter()
                .filter(|(_, l)| labels.contains(l))
                .map(|(c, _)| c.span),
        )
    };
    MidEntry {
        reference: format!("{} sample # {counter}", sentence.doc_id),
        autonym: slot(&[ConstituentLabel::Autonym]).unwrap_or_else(|| EXISTENTIAL.to_string()),
        information: slot(&[ConstituentLabel::InfoSegment, ConstituentLabel::Anaphoric])
            .unwrap_or_else(|| EXISTENTIAL.to_string()),
        markers: slot(&[ConstituentLabel::MarkerOperator]).unwrap_or_default(),
        agent: slot(&[ConstituentLabel::Agent]),
        flags: analysis.flags.clone(),
        confidence,
    }
}

pub fn write_mid_jsonl(entries: &[MidEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&serde_json::to_string(e).expect("MID entries always serialize"));
        out.push('\n');
    }
    out
}

/// Four-column tab-separated view (reference, autonym, information,
/// markers) with a header row; tabs and newlines inside slots become spaces.
pub fn write_mid_tsv(entries: &[MidEntry]) -> String {
    let clean = |s: &str| s.replace(['\t', '\n', '\r'], " ");
    let mut out = String::from("reference\tautonym\tinformation\tmarkers\n");
    for e in entries {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            clean(&e.reference),
            clean(&e.autonym),
            clean(&e.information),
            clean(&e.markers)
        );
    }
    out
}

/// Reads MID records from JSON lines; blank lines are skipped.
pub fn read_mid(content: &str) -> Result<Vec<MidEntry>> {
    content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|source| Error::Json {
                context: format!("MID line {}", n + 1),
                source,
            })
        })
        .collect()
}
