//! Scoring of candidate filtering and of MID slot extraction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Document, SentenceRef};
use crate::error::{Error, Result};
use crate::extraction::{ExtractedEntry, MidEntry, Pipeline, SentenceOutcome};
use crate::filter::{Instance, Label};
use crate::tagger::pos_tag;

/// Default slot similarity threshold.
pub const DEFAULT_THRESHOLD: f64 = 0.65;

/// One gold annotation line: `{doc, sentence, is_emo, autonym?, information?, markers?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub doc: String,
    pub sentence: usize,
    pub is_emo: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub autonym: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub information: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markers: Option<String>,
}

impl GoldRecord {
    pub fn sentence_ref(&self) -> SentenceRef {
        SentenceRef {
            doc_id: self.doc.clone(),
            sentence: self.sentence,
        }
    }

    pub fn has_slots(&self) -> bool {
        self.autonym.is_some() || self.information.is_some() || self.markers.is_some()
    }
}

/// Reads gold JSON lines; slots must be present only on EMO sentences.
pub fn read_gold(content: &str) -> Result<Vec<GoldRecord>> {
    let mut out = Vec::new();
    for (n, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: GoldRecord = serde_json::from_str(line).map_err(|source| Error::Json {
            context: format!("gold line {}", n + 1),
            source,
        })?;
        if !r.is_emo && r.has_slots() {
            return Err(Error::Config(format!("gold line {}: slots on a non-EMO sentence", n + 1)));
        }
        out.push(r);
    }
    Ok(out)
}

/// Every trigger match in `docs` (documents in id order), labeled with the
/// gold EMO status of its sentence. Filtering is not applied.
pub fn labeled_instances(pipeline: &Pipeline, docs: &[Document], gold: &[GoldRecord]) -> Result<Vec<Instance>> {
    let truth: BTreeMap<SentenceRef, bool> = gold.iter().map(|g| (g.sentence_ref(), g.is_emo)).collect();
    let mut sorted: Vec<&Document> = docs.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut out = Vec::new();
    let mut missing = Vec::new();
    for doc in sorted {
        for s in pipeline.tokenizer.segment(doc) {
            let matches = pipeline.cascade.scan(&s);
            if matches.is_empty() {
                continue;
            }
            let Some(&is_emo) = truth.get(&s.reference()) else {
                missing.push(s.reference().to_string());
                continue;
            };
            let tags = pos_tag(&s, &pipeline.tagger);
            for m in matches {
                out.push(Instance {
                    sentence: s.clone(),
                    tags: tags.clone(),
                    matched: m,
                    label: if is_emo { Label::Yes } else { Label::No },
                });
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Unaligned(missing));
    }
    Ok(out)
}

fn normalized(s: &str) -> Vec<String> {
    tokenize(s).into_iter().filter(|t| !t.is_punct()).map(|t| t.lower()).collect()
}

/// Multiset token recall of `gold` in `candidate`, after lowercasing and
/// dropping punctuation tokens.
pub fn slot_similarity(candidate: &str, gold: &str) -> Result<f64> {
    let gold = normalized(gold);
    if gold.is_empty() {
        return Err(Error::EmptyGold);
    }
    let mut pool: BTreeMap<String, usize> = BTreeMap::new();
    for t in normalized(candidate) {
        *pool.entry(t).or_default() += 1;
    }
    let hits = gold
        .iter()
        .filter(|t| match pool.get_mut(*t) {
            Some(c) if *c > 0 => {
                *c -= 1;
                true
            }
            _ => false,
        })
        .count();
    Ok(hits as f64 / gold.len() as f64)
}

/// Markers match when every gold word is present in the candidate; a gold
/// marker made only of quote marks must appear verbatim.
pub fn markers_match(candidate: &str, gold: &str) -> bool {
    let g = normalized(gold);
    if g.is_empty() {
        return !gold.trim().is_empty() && gold.split_whitespace().all(|q| candidate.contains(q));
    }
    let mut c = normalized(candidate);
    g.iter().all(|t| match c.iter().position(|x| x == t) {
        Some(i) => {
            c.swap_remove(i);
            true
        }
        None => false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntryPolicy {
    /// Autonym or information positive.
    Any,
    /// Autonym and information positive.
    #[default]
    All,
}

impl FromStr for EntryPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "any" => Ok(EntryPolicy::Any),
            "all" => Ok(EntryPolicy::All),
            _ => Err(format!("unknown entry policy `{s}`")),
        }
    }
}

impl std::fmt::Display for EntryPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EntryPolicy::Any => "any",
            EntryPolicy::All => "all",
        })
    }
}

/// Slot strings of one record, system or gold.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    /// Alignment key; records are compared only within equal keys.
    pub key: String,
    pub doc: String,
    pub autonym: String,
    pub information: String,
    pub markers: String,
}

impl SlotRecord {
    /// Keyed by MID reference, for comparing two MIDs.
    pub fn from_mid(e: &MidEntry) -> SlotRecord {
        let doc = e.reference.rsplit_once(" sample # ").map_or(e.reference.as_str(), |x| x.0);
        SlotRecord {
            key: e.reference.clone(),
            doc: doc.to_string(),
            autonym: e.autonym.clone(),
            information: e.information.clone(),
            markers: e.markers.clone(),
        }
    }

    /// Keyed by sentence, for comparing pipeline output with gold annotations.
    pub fn from_extracted(e: &ExtractedEntry) -> SlotRecord {
        SlotRecord {
            key: e.sentence_ref.to_string(),
            doc: e.sentence_ref.doc_id.clone(),
            ..SlotRecord::from_mid(&e.entry)
        }
    }

    /// None unless the record is an EMO carrying autonym and information.
    pub fn from_gold(g: &GoldRecord) -> Option<SlotRecord> {
        if !g.is_emo {
            return None;
        }
        Some(SlotRecord {
            key: g.sentence_ref().to_string(),
            doc: g.doc.clone(),
            autonym: g.autonym.clone()?,
            information: g.information.clone()?,
            markers: g.markers.clone().unwrap_or_default(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotScore {
    pub autonym: bool,
    pub information: bool,
    pub markers: bool,
}

impl SlotScore {
    pub fn entry(&self, policy: EntryPolicy) -> bool {
        match policy {
            EntryPolicy::Any => self.autonym || self.information,
            EntryPolicy::All => self.autonym && self.information,
        }
    }
}

/// Per-slot positives of one system record against one gold record.
pub fn score_entry(system: &SlotRecord, gold: &SlotRecord, threshold: f64) -> Result<SlotScore> {
    Ok(SlotScore {
        autonym: slot_similarity(&system.autonym, &gold.autonym)? >= threshold,
        information: slot_similarity(&system.information, &gold.information)? >= threshold,
        markers: markers_match(&system.markers, &gold.markers),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub beta: f64,
    /// None when undefined (no predictions).
    pub precision: Option<f64>,
    /// None when undefined (no gold positives).
    pub recall: Option<f64>,
    pub f_measure: Option<f64>,
}

/// `(1 + b^2) P R / (b^2 P + R)`; zero when both P and R are zero.
pub fn f_beta(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let den = b2 * precision + recall;
    if den == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / den
    }
}

pub fn compute_prf(tp: usize, fp: usize, fn_: usize, beta: f64) -> Metrics {
    assert!(beta > 0.0, "beta must be positive");
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f_measure = match (precision, recall) {
        (Some(p), Some(r)) => Some(f_beta(p, r, beta)),
        _ => None,
    };
    Metrics {
        tp,
        fp,
        fn_,
        beta,
        precision,
        recall,
        f_measure,
    }
}

/// Two decimals, halves rounded up.
pub fn round2(x: f64) -> f64 {
    (x * 100.0 + 0.5 + 1e-9).floor() / 100.0
}

/// `0.87` or `NA`.
pub fn fmt_metric(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| format!("{:.2}", round2(v)))
}

/// Sentence-level filtering scores. In golden-standard mode, gold EMO
/// sentences on which no trigger pattern fired are dropped first.
pub fn evaluate_filtering(
    outcomes: &[SentenceOutcome],
    gold: &[GoldRecord],
    golden_standard: bool,
    beta: f64,
) -> Result<Metrics> {
    let predicted: BTreeMap<SentenceRef, &SentenceOutcome> =
        outcomes.iter().map(|o| (o.sentence_ref.clone(), o)).collect();
    let truth: BTreeMap<SentenceRef, bool> = gold.iter().map(|g| (g.sentence_ref(), g.is_emo)).collect();
    let p_keys: BTreeSet<_> = predicted.keys().collect();
    let g_keys: BTreeSet<_> = truth.keys().collect();
    let unaligned: Vec<String> = p_keys.symmetric_difference(&g_keys).map(|r| r.to_string()).collect();
    if !unaligned.is_empty() {
        return Err(Error::Unaligned(unaligned));
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (r, o) in &predicted {
        let is_emo = truth[r];
        if golden_standard && is_emo && !o.matched {
            continue;
        }
        match (o.predicted_emo, is_emo) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(compute_prf(tp, fp, fn_, beta))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MidReport {
    pub threshold: f64,
    pub policy: EntryPolicy,
    pub autonym: Metrics,
    pub information: Metrics,
    pub markers: Metrics,
    pub entry: Metrics,
    /// Per document: gold record count and entry-level metrics.
    pub per_doc: Vec<(String, usize, Metrics)>,
}

#[derive(Default, Clone, Copy)]
struct Counts {
    tp: usize,
    sys: usize,
    gold: usize,
}

impl Counts {
    fn metrics(self, beta: f64) -> Metrics {
        compute_prf(self.tp, self.sys - self.tp, self.gold - self.tp, beta)
    }
}

/// Greedy one-to-one pairing inside a key; returns how many pairs satisfy `hit`.
fn pair_count(sys: &[&SlotRecord], gold: &[&SlotRecord], hit: impl Fn(&SlotRecord, &SlotRecord) -> Result<bool>) -> Result<usize> {
    let mut used = vec![false; sys.len()];
    let mut n = 0;
    for g in gold {
        for (i, s) in sys.iter().enumerate() {
            if !used[i] && hit(s, g)? {
                used[i] = true;
                n += 1;
                break;
            }
        }
    }
    Ok(n)
}

/// Per-slot and entry-level scores. Records pair up only within equal keys;
/// each gold record is matched at most once per slot.
pub fn evaluate_mid(
    system: &[SlotRecord],
    gold: &[SlotRecord],
    threshold: f64,
    policy: EntryPolicy,
    beta: f64,
) -> Result<MidReport> {
    let mut groups: BTreeMap<&str, (Vec<&SlotRecord>, Vec<&SlotRecord>)> = BTreeMap::new();
    for s in system {
        groups.entry(&s.key).or_default().0.push(s);
    }
    for g in gold {
        groups.entry(&g.key).or_default().1.push(g);
    }
    let mut slots = [Counts::default(); 4];
    let mut per_doc: BTreeMap<String, Counts> = BTreeMap::new();
    for (sys, gld) in groups.values() {
        let doc = sys.first().or(gld.first()).map(|r| r.doc.clone()).unwrap_or_default();
        let hits = [
            pair_count(sys, gld, |s, g| Ok(slot_similarity(&s.autonym, &g.autonym)? >= threshold))?,
            pair_count(sys, gld, |s, g| Ok(slot_similarity(&s.information, &g.information)? >= threshold))?,
            pair_count(sys, gld, |s, g| Ok(markers_match(&s.markers, &g.markers)))?,
            pair_count(sys, gld, |s, g| Ok(score_entry(s, g, threshold)?.entry(policy)))?,
        ];
        for (c, h) in slots.iter_mut().zip(hits) {
            c.tp += h;
            c.sys += sys.len();
            c.gold += gld.len();
        }
        let d = per_doc.entry(doc).or_default();
        d.tp += hits[3];
        d.sys += sys.len();
        d.gold += gld.len();
    }
    Ok(MidReport {
        threshold,
        policy,
        autonym: slots[0].metrics(beta),
        information: slots[1].metrics(beta),
        markers: slots[2].metrics(beta),
        entry: slots[3].metrics(beta),
        per_doc: per_doc.into_iter().map(|(d, c)| (d, c.gold, c.metrics(beta))).collect(),
    })
}

/// Filtering and MID scores for one evaluation run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub filtering: Metrics,
    pub golden_standard: Metrics,
    pub mid: Option<MidReport>,
}

fn row(name: &str, m: &Metrics) -> String {
    format!(
        "{name:<22}{:>5}{:>5}{:>5}{:>7}{:>7}{:>7}\n",
        m.tp,
        m.fp,
        m.fn_,
        fmt_metric(m.precision),
        fmt_metric(m.recall),
        fmt_metric(m.f_measure)
    )
}

impl EvalReport {
    pub fn table(&self) -> String {
        let mut out = format!("{:<22}{:>5}{:>5}{:>5}{:>7}{:>7}{:>7}\n", "", "tp", "fp", "fn", "P", "R", "F");
        out += &row("filtering", &self.filtering);
        out += &row("filtering (golden)", &self.golden_standard);
        if let Some(mid) = &self.mid {
            out += &row("autonym", &mid.autonym);
            out += &row("information", &mid.information);
            out += &row("markers", &mid.markers);
            out += &row(&format!("entry ({})", mid.policy), &mid.entry);
            let _ = writeln!(out, "\n(# of Records/Global F) at threshold {}", mid.threshold);
            for (doc, n, m) in &mid.per_doc {
                let _ = writeln!(out, "{doc}: ({n}/{})", fmt_metric(m.f_measure));
            }
        }
        out
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("section,scope,tp,fp,fn,precision,recall,f\n");
        let mut push = |section: &str, scope: &str, m: &Metrics| {
            let _ = writeln!(
                out,
                "{section},{scope},{},{},{},{},{},{}",
                m.tp,
                m.fp,
                m.fn_,
                fmt_metric(m.precision),
                fmt_metric(m.recall),
                fmt_metric(m.f_measure)
            );
        };
        push("filtering", "full", &self.filtering);
        push("filtering", "golden-standard", &self.golden_standard);
        if let Some(mid) = &self.mid {
            push("slot", "autonym", &mid.autonym);
            push("slot", "information", &mid.information);
            push("slot", "markers", &mid.markers);
            push("entry", "all-documents", &mid.entry);
            for (doc, _, m) in &mid.per_doc {
                push("entry", doc, m);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(key: &str, a: &str, i: &str, m: &str) -> SlotRecord {
        SlotRecord {
            key: key.into(),
            doc: "D".into(),
            autonym: a.into(),
            information: i.into(),
            markers: m.into(),
        }
    }

    #[test]
    fn similarity_examples() {
        assert_eq!(slot_similarity("fine hollow tubes", "fine hollow tubes").unwrap(), 1.0);
        assert!((slot_similarity("hollow tubes", "fine hollow tubes").unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((slot_similarity("tubes", "fine hollow tubes").unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(slot_similarity("The Tubes!", "tubes").unwrap(), 1.0);
        assert_eq!(slot_similarity("tubes tubes", "tubes fine").unwrap(), 0.5);
        assert!(matches!(slot_similarity("x", " . "), Err(Error::EmptyGold)));
    }

    #[test]
    fn published_f_measures() {
        assert_eq!(round2(f_beta(0.97, 0.79, 1.0)), 0.87);
        assert_eq!(round2(f_beta(0.94, 0.81, 1.0)), 0.87);
        let m = compute_prf(10, 0, 0, 1.0);
        assert_eq!((m.precision, m.recall, m.f_measure), (Some(1.0), Some(1.0), Some(1.0)));
        let m = compute_prf(0, 0, 4, 1.0);
        assert_eq!((m.precision, m.recall, m.f_measure), (None, Some(0.0), None));
        assert_eq!(round2(0.125), 0.13);
    }

    #[test]
    fn markers_by_containment() {
        assert!(markers_match("are also known as", "known as"));
        assert!(markers_match("will be called “ ”", "called"));
        assert!(!markers_match("called", "known as"));
        assert!(markers_match("“ ” means", "“ ”"));
        assert!(!markers_match("means", "“ ”"));
    }

    #[test]
    fn slots_scored_independently() {
        let gold = [rec("k", "tracheae", "fine hollow tubes", "known as")];
        let sys = [rec("k", "tracheae", "air", "known as")];
        let r = evaluate_mid(&sys, &gold, DEFAULT_THRESHOLD, EntryPolicy::All, 1.0).unwrap();
        assert_eq!((r.autonym.tp, r.information.tp, r.information.fp, r.information.fn_), (1, 0, 1, 1));
        assert_eq!(r.entry.tp, 0);
        let any = evaluate_mid(&sys, &gold, DEFAULT_THRESHOLD, EntryPolicy::Any, 1.0).unwrap();
        assert_eq!(any.entry.tp, 1);
    }

    #[test]
    fn filtering_alignment_and_golden_mode() {
        let r = |s| SentenceRef {
            doc_id: "D".into(),
            sentence: s,
        };
        let out = |s, matched, predicted_emo| SentenceOutcome {
            sentence_ref: r(s),
            matched,
            predicted_emo,
        };
        let gold = |s, is_emo| GoldRecord {
            doc: "D".into(),
            sentence: s,
            is_emo,
            autonym: None,
            information: None,
            markers: None,
        };
        let outcomes = [out(0, true, true), out(1, false, false), out(2, true, false)];
        let golds = [gold(0, true), gold(1, true), gold(2, false)];
        let full = evaluate_filtering(&outcomes, &golds, false, 1.0).unwrap();
        let gs = evaluate_filtering(&outcomes, &golds, true, 1.0).unwrap();
        assert_eq!((full.recall, gs.recall), (Some(0.5), Some(1.0)));
        let err = evaluate_filtering(&outcomes[..2], &golds, false, 1.0).unwrap_err();
        assert!(matches!(err, Error::Unaligned(v) if v == ["D#2"]));
    }
}
