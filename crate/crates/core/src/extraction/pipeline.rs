use std::collections::BTreeMap;

use super::{analyze_sentence, fill_template, EmoAnalysis, MidEntry};
use crate::corpus::{Document, Sentence, SentenceRef, Tokenizer};
use crate::error::Result;
use crate::filter::{apply_collocation_filter, classify, featurize, CollocationRule, Decision, Model};
use crate::patterns::{Cascade, TriggerMatch};
use crate::tagger::{pos_tag, PosTag, Tagger};

/// How candidate matches are filtered before analysis.
#[derive(Debug, Clone)]
pub enum FilterStage {
    /// Keep every match.
    None,
    Collocation(Vec<CollocationRule>),
    Classifier(Model),
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    pub tokenizer: Tokenizer,
    pub cascade: Cascade,
    pub filter: FilterStage,
    pub tagger: Tagger,
}

impl Default for Pipeline {
    /// Bundled resources with no filtering.
    fn default() -> Self {
        Pipeline {
            tokenizer: Tokenizer::default(),
            cascade: Cascade::default(),
            filter: FilterStage::None,
            tagger: Tagger::default(),
        }
    }
}

/// What the pipeline decided for one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceOutcome {
    pub sentence_ref: SentenceRef,
    /// At least one trigger pattern matched.
    pub matched: bool,
    /// At least one match survived filtering.
    pub predicted_emo: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedEntry {
    pub entry: MidEntry,
    pub sentence_ref: SentenceRef,
    pub matched: TriggerMatch,
}

/// A sentence after scanning, filtering and analysis.
#[derive(Debug, Clone)]
pub struct ProcessedSentence {
    pub sentence: Sentence,
    pub tags: Vec<PosTag>,
    pub matches: Vec<TriggerMatch>,
    /// Kept matches with their confidence.
    pub kept: Vec<(TriggerMatch, f64)>,
    pub analyses: Vec<(EmoAnalysis, f64)>,
}

impl Pipeline {
    /// Keeps or drops one match; the second value is the confidence.
    fn decide(&self, sentence: &Sentence, tags: &[PosTag], m: &TriggerMatch) -> Result<(bool, f64)> {
        Ok(match &self.filter {
            FilterStage::None => (true, 1.0),
            FilterStage::Collocation(rules) => (apply_collocation_filter(sentence, m, rules) == Decision::Keep, 1.0),
            FilterStage::Classifier(model) => {
                let (kind, width) = model.shape();
                let v = featurize(sentence, m, kind, width, Some(tags))?;
                let (label, p) = classify(model, &v)?;
                (label.is_yes(), p)
            }
        })
    }

    pub fn process(&self, sentence: Sentence) -> Result<ProcessedSentence> {
        let tags = pos_tag(&sentence, &self.tagger);
        let matches = self.cascade.scan(&sentence);
        let mut kept = Vec::new();
        for m in &matches {
            let (keep, p) = self.decide(&sentence, &tags, m)?;
            if keep {
                kept.push((m.clone(), p));
            }
        }
        let kept_matches: Vec<TriggerMatch> = kept.iter().map(|(m, _)| m.clone()).collect();
        let analyses = analyze_sentence(&sentence, &tags, &kept_matches)
            .into_iter()
            .map(|(i, a)| (a, kept[i].1))
            .collect();
        Ok(ProcessedSentence {
            sentence,
            tags,
            matches,
            kept,
            analyses,
        })
    }

    pub fn process_document(&self, doc: &Document) -> Result<Vec<ProcessedSentence>> {
        self.tokenizer.segment(doc).into_iter().map(|s| self.process(s)).collect()
    }
}

impl ProcessedSentence {
    pub fn outcome(&self) -> SentenceOutcome {
        SentenceOutcome {
            sentence_ref: self.sentence.reference(),
            matched: !self.matches.is_empty(),
            predicted_emo: !self.kept.is_empty(),
        }
    }
}

/// Runs the full pipeline over `docs`. Records are ordered by document id,
/// then sentence, then match; reference numbers restart at 1 per document.
pub fn build_mid(docs: &[Document], pipeline: &Pipeline) -> Result<(Vec<ExtractedEntry>, Vec<SentenceOutcome>)> {
    let mut by_doc: BTreeMap<&str, &Document> = BTreeMap::new();
    for d in docs {
        by_doc.insert(&d.id, d);
    }
    let mut entries = Vec::new();
    let mut outcomes = Vec::new();
    for doc in by_doc.values() {
        let mut counter = 0;
        for p in pipeline.process_document(doc)? {
            outcomes.push(p.outcome());
            for (a, confidence) in &p.analyses {
                counter += 1;
                entries.push(ExtractedEntry {
                    entry: fill_template(a, &p.sentence, counter, *confidence),
                    sentence_ref: a.sentence_ref.clone(),
                    matched: a.matched.clone(),
                });
            }
        }
    }
    Ok((entries, outcomes))
}
