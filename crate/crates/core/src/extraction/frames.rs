//! Marker-specific argument frames.
//!
//! Each match is analysed against the token regions on either side of it,
//! chunked separately so no phrase straddles the marker. The marker lexeme
//! picks a family:
//!
//! * naming verbs (call, term, dub, name, know, refer): passive
//!   `X is called Y`, active `A calls X Y`, appositive `X, known as Y` and
//!   reduced relative `X called Y`;
//! * defining verbs (define, denote, coin): the autonym is the subject and
//!   the information follows the marker;
//! * descriptors (`the term T ...`): the autonym follows the descriptor and
//!   the rest of the clause is the information;
//! * `so called T`: the information is whatever noun phrase directly
//!   precedes, or the existential placeholder.

use std::collections::BTreeSet;

use super::{ConstituentLabel, EmoAnalysis, Flag, Frame};
use crate::corpus::Sentence;
use crate::patterns::{Category, TriggerMatch};
use crate::tagger::{attach_pp, chunk_range, Chunk, ChunkKind, PosTag};

const DEFINING: &[&str] = &[
    "define", "defines", "defined", "defining", "denote", "denotes", "denoted", "denoting", "coin", "coins",
    "coined", "coining",
];
const BE: &[&str] = &["be", "is", "are", "was", "were", "been", "being", "am", "get", "gets", "got", "gotten"];
const AUX: &[&str] = &[
    "has", "have", "had", "having", "will", "would", "can", "could", "may", "might", "must", "shall", "should",
];
const ARTICLES: &[&str] = &["a", "an", "the"];
const DEMONSTRATIVES: &[&str] = &["this", "that", "these", "those"];
const COMPLEMENTIZERS: &[&str] = &["that", "whether", "because", "since", "although", "while", "if"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Naming,
    Defining,
    Descriptor,
    SoCalled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Voice {
    Passive,
    Active,
    Participle,
}

type Span = (usize, usize);

struct Ctx<'a> {
    s: &'a Sentence,
    tags: &'a [PosTag],
    words: Vec<String>,
}

impl Ctx<'_> {
    fn region(&self, start: usize, end: usize) -> Vec<Chunk> {
        if start >= end {
            return Vec::new();
        }
        attach_pp(chunk_range(self.tags, start, end), &self.s.tokens)
    }

    fn is_punct(&self, i: usize) -> bool {
        self.tags[i].is_punct()
    }
}

/// A chunk plus every PP attached to it (directly or through a chain).
fn extended(chunks: &[Chunk], idx: usize) -> Span {
    let mut end = chunks[idx].span.1;
    for c in &chunks[idx + 1..] {
        if c.kind == ChunkKind::PP && c.attached_to == Some(idx) {
            end = c.span.1;
        } else {
            break;
        }
    }
    (chunks[idx].span.0, end)
}

/// The noun phrase ending exactly at token `end`, PP attachments included.
fn np_ending_at(chunks: &[Chunk], end: usize) -> Option<Span> {
    let i = chunks.iter().position(|c| c.span.1 == end)?;
    let c = &chunks[i];
    match (c.kind, c.attached_to) {
        (ChunkKind::NP, _) => Some(c.span),
        (ChunkKind::PP, Some(np)) => Some((chunks[np].span.0, end)),
        (ChunkKind::PP, None) => c.object_span(),
        _ => None,
    }
}

struct Builder<'a> {
    ctx: &'a Ctx<'a>,
    labeled: Vec<(Chunk, ConstituentLabel)>,
    flags: BTreeSet<Flag>,
}

impl Builder<'_> {
    fn label(&mut self, kind: ChunkKind, span: Span, label: ConstituentLabel) {
        self.labeled.push((Chunk::new(kind, span.0, span.1, span.1), label));
    }

    fn marker(&mut self, span: Span) {
        self.label(ChunkKind::O, span, ConstituentLabel::MarkerOperator);
    }

    fn existential(&mut self) {
        self.flags.insert(Flag::ExistentialPlaceholder);
    }

    /// Autonym with article stripping, acronym and adjacent quote absorption.
    fn autonym(&mut self, span: Span) {
        let ctx = self.ctx;
        let (mut first, mut last) = span;
        let n = ctx.s.len();
        if ctx.tags[first] == PosTag::OpenQuote && ctx.tags[last] == PosTag::CloseQuote && last > first + 1 {
            self.marker((first, first));
            self.marker((last, last));
            first += 1;
            last -= 1;
        }
        if last + 3 < n
            && ctx.words[last + 1] == "("
            && ctx.words[last + 3] == ")"
            && is_acronym(&ctx.s.tokens[last + 2].surface)
        {
            last += 3;
        }
        if first > 0 && ctx.tags[first - 1] == PosTag::OpenQuote {
            self.marker((first - 1, first - 1));
        }
        if last + 1 < n && ctx.tags[last + 1] == PosTag::CloseQuote {
            self.marker((last + 1, last + 1));
        } else if last + 2 < n
            && matches!(ctx.tags[last + 1], PosTag::Period | PosTag::Comma)
            && ctx.tags[last + 2] == PosTag::CloseQuote
        {
            self.marker((last + 2, last + 2));
        }
        if first < last && ctx.tags[first] == PosTag::DT && ARTICLES.contains(&ctx.words[first].as_str()) {
            first += 1;
        }
        self.label(ChunkKind::NP, (first, last), ConstituentLabel::Autonym);
    }

    fn autonym_or_placeholder(&mut self, span: Option<Span>) {
        match span {
            Some(s) => self.autonym(s),
            None => self.existential(),
        }
    }

    /// Informational segment; lone pronouns, demonstratives and free
    /// relatives stay unresolved.
    fn info(&mut self, span: Option<Span>, kind: ChunkKind) {
        let Some((first, last)) = span else {
            self.existential();
            return;
        };
        let ctx = self.ctx;
        let w = ctx.words[first].as_str();
        let anaphoric = first == last
            && (ctx.tags[first] == PosTag::PRP
                || ctx.tags[first] == PosTag::WP
                || (ctx.tags[first] == PosTag::DT && DEMONSTRATIVES.contains(&w)));
        if anaphoric {
            self.flags.insert(Flag::AnaphoricUnresolved);
            self.label(ChunkKind::NP, (first, last), ConstituentLabel::Anaphoric);
        } else {
            self.label(kind, (first, last), ConstituentLabel::InfoSegment);
        }
    }

    fn agent(&mut self, span: Option<Span>) {
        if let Some(s) = span {
            self.label(ChunkKind::NP, s, ConstituentLabel::Agent);
        }
    }

    fn covered(&self, span: Span) -> bool {
        self.labeled
            .iter()
            .any(|(c, _)| c.span.0 <= span.1 && span.0 <= c.span.1)
    }
}

fn is_acronym(s: &str) -> bool {
    s.chars().count() >= 2
        && s.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '-')
        && s.chars().any(|c| c.is_ascii_uppercase())
}

fn family(ctx: &Ctx, m: &TriggerMatch) -> Family {
    let lex = ctx.words[m.marker_index].as_str();
    if m.category == Category::DescriptorMarker {
        Family::Descriptor
    } else if lex == "so-called" || (m.marker_index > 0 && ctx.words[m.marker_index - 1] == "so") {
        Family::SoCalled
    } else if DEFINING.contains(&lex) {
        Family::Defining
    } else {
        Family::Naming
    }
}

/// Auxiliary chain directly before the match (adverbs inside it included).
/// Returns where marker material starts and the voice.
fn voice(ctx: &Ctx, m: &TriggerMatch) -> (usize, Voice) {
    let mut i = m.token_span.0;
    let mut start = i;
    let mut passive = false;
    while i > 0 {
        let t = i - 1;
        let w = ctx.words[t].as_str();
        if BE.contains(&w) {
            passive = true;
            start = t;
        } else if AUX.contains(&w) {
            start = t;
        } else if ctx.tags[t] != PosTag::RB {
            break;
        }
        i = t;
    }
    let v = if passive {
        Voice::Passive
    } else if start < m.token_span.0 || ctx.tags[m.marker_index] != PosTag::VBN {
        Voice::Active
    } else {
        Voice::Participle
    };
    (start, v)
}

/// Clause before `end` (exclusive) back to the nearest punctuation barrier
/// or complementizer; a free relative `what` is kept and ends the scan.
fn subject_clause(ctx: &Ctx, end: usize) -> Option<Span> {
    let mut i = end;
    while i > 0 {
        let t = i - 1;
        let tag = ctx.tags[t];
        if matches!(
            tag,
            PosTag::Comma | PosTag::Colon | PosTag::LeftParen | PosTag::RightParen | PosTag::OpenQuote | PosTag::CloseQuote | PosTag::Period
        ) {
            break;
        }
        if tag == PosTag::IN && COMPLEMENTIZERS.contains(&ctx.words[t].as_str()) {
            break;
        }
        i = t;
        if tag == PosTag::WP {
            break;
        }
    }
    while i < end && ctx.tags[i] == PosTag::CC {
        i += 1;
    }
    (i < end).then(|| (i, end - 1))
}

/// Tokens from `start` to the end of the sentence minus closing punctuation.
fn remainder(ctx: &Ctx, start: usize) -> Option<Span> {
    let mut end = ctx.s.len();
    while end > start && ctx.is_punct(end - 1) {
        end -= 1;
    }
    (start < end).then(|| (start, end - 1))
}

/// First right-hand chunk as a noun phrase, with PP attachment and `NP CC NP`
/// coordination folded in.
fn leading_np(ctx: &Ctx, chunks: &[Chunk]) -> Option<(Span, usize)> {
    let first = chunks.first()?;
    if first.kind != ChunkKind::NP {
        return None;
    }
    let (start, mut end) = extended(chunks, 0);
    let mut next = chunks.iter().position(|c| c.span.0 == end + 1).unwrap_or(chunks.len());
    if next + 1 < chunks.len()
        && ctx.tags[chunks[next].span.0] == PosTag::CC
        && chunks[next].span.0 == chunks[next].span.1
        && chunks[next + 1].kind == ChunkKind::NP
    {
        end = extended(chunks, next + 1).1;
        next = chunks.iter().position(|c| c.span.0 == end + 1).unwrap_or(chunks.len());
    }
    Some(((start, end), next))
}

/// Splits `this process "structuration"` into the pre-quote part and the quoted nominal.
fn quoted_tail(ctx: &Ctx, span: Span) -> Option<(Span, Span)> {
    let q = (span.0 + 1..=span.1).find(|&i| ctx.tags[i] == PosTag::OpenQuote)?;
    Some(((span.0, q - 1), (q, span.1)))
}

/// `by NP` agent right after chunk index `next`.
fn by_agent(ctx: &Ctx, chunks: &[Chunk], next: usize) -> Option<Span> {
    let c = chunks.get(next)?;
    (c.kind == ChunkKind::PP && ctx.words[c.head] == "by")
        .then(|| c.object_span())
        .flatten()
}

/// Skips adverbs backwards from `end` (exclusive).
fn skip_adverbs(ctx: &Ctx, mut end: usize) -> usize {
    while end > 0 && ctx.tags[end - 1] == PosTag::RB {
        end -= 1;
    }
    end
}

/// Labels the constituents of one match. `co_matches` are the other kept
/// matches of the sentence; a descriptor absorbs a following verb group
/// that carries one of their markers.
pub fn label_constituents(
    sentence: &Sentence,
    tags: &[PosTag],
    m: &TriggerMatch,
    co_matches: &[TriggerMatch],
) -> EmoAnalysis {
    assert_eq!(sentence.len(), tags.len(), "tags must align with tokens");
    let ctx = Ctx {
        s: sentence,
        tags,
        words: sentence.tokens.iter().map(|t| t.lower()).collect(),
    };
    let n = sentence.len();
    let (a, b) = m.token_span;
    let fam = family(&ctx, m);
    let mut bld = Builder {
        ctx: &ctx,
        labeled: Vec::new(),
        flags: BTreeSet::new(),
    };
    let (lstart, v) = match fam {
        Family::Naming | Family::Defining => voice(&ctx, m),
        _ => (a, Voice::Active),
    };
    bld.marker((lstart, b));
    let left = ctx.region(0, lstart);
    let right = ctx.region(b + 1, n);

    let frame = match fam {
        Family::Descriptor => {
            let lead = leading_np(&ctx, &right);
            let mut after = b + 1;
            if let Some((span, next)) = lead {
                bld.autonym(span);
                after = span.1 + 1;
                if let Some(vp) = right.get(next).filter(|c| c.kind == ChunkKind::VP) {
                    let carries = co_matches
                        .iter()
                        .any(|o| o.marker_index >= vp.span.0 && o.marker_index <= vp.span.1);
                    if carries {
                        bld.marker(vp.span);
                        after = vp.span.1 + 1;
                    }
                }
                while after < n && bld.covered((after, after)) {
                    after += 1;
                }
            } else {
                bld.existential();
            }
            bld.info(remainder(&ctx, after), ChunkKind::O);
            if left.len() >= 2 {
                let (np, vp) = (&left[left.len() - 2], &left[left.len() - 1]);
                if np.kind == ChunkKind::NP && vp.kind == ChunkKind::VP {
                    bld.agent(Some(np.span));
                }
            }
            Frame::Unassigned
        }
        Family::SoCalled => {
            bld.autonym_or_placeholder(leading_np(&ctx, &right).map(|x| x.0));
            let before = if a > 0 { np_ending_at(&left, a - 1) } else { None };
            bld.info(before, ChunkKind::NP);
            Frame::NameBearing
        }
        Family::Naming => match v {
            Voice::Passive => {
                let lead = leading_np(&ctx, &right);
                bld.autonym_or_placeholder(lead.map(|x| x.0));
                bld.info(subject_clause(&ctx, lstart), ChunkKind::O);
                let agent = lead.and_then(|(_, next)| by_agent(&ctx, &right, next));
                bld.agent(agent);
                if agent.is_some() {
                    Frame::NameConferral
                } else {
                    Frame::NameBearing
                }
            }
            Voice::Participle => {
                let appositive = a > 1 && ctx.tags[a - 1] == PosTag::Comma;
                let before = if appositive {
                    np_ending_at(&ctx.region(0, a - 1), a - 2)
                } else if a > 0 {
                    np_ending_at(&left, a - 1)
                } else {
                    None
                };
                if before.is_some() && !appositive {
                    bld.flags.insert(Flag::Sortal);
                }
                let lead = leading_np(&ctx, &right);
                bld.autonym_or_placeholder(lead.map(|x| x.0));
                bld.info(before, ChunkKind::NP);
                bld.agent(lead.and_then(|(_, next)| by_agent(&ctx, &right, next)));
                Frame::NameBearing
            }
            Voice::Active => {
                let agent_end = skip_adverbs(&ctx, lstart);
                let agent = if agent_end > 0 { np_ending_at(&left, agent_end - 1) } else { None };
                bld.agent(agent);
                match leading_np(&ctx, &right) {
                    Some((span, next)) => {
                        if let Some((info, quoted)) = quoted_tail(&ctx, span) {
                            bld.info(Some(info), ChunkKind::NP);
                            bld.autonym(quoted);
                        } else if let Some(second) = right.get(next).filter(|c| c.kind == ChunkKind::NP) {
                            let idx = right.iter().position(|c| c == second).expect("chunk from list");
                            bld.info(Some(span), ChunkKind::NP);
                            bld.autonym(extended(&right, idx));
                        } else {
                            bld.autonym(span);
                            let wh = agent.and_then(|(s, _)| s.checked_sub(1)).filter(|&i| ctx.tags[i] == PosTag::WP);
                            bld.info(wh.map(|i| (i, i)), ChunkKind::NP);
                        }
                    }
                    None => {
                        bld.existential();
                        bld.info(None, ChunkKind::NP);
                    }
                }
                Frame::NameConferral
            }
        },
        Family::Defining => {
            let coin = ctx.words[m.marker_index].starts_with("coin");
            match v {
                Voice::Active if coin => {
                    let agent_end = skip_adverbs(&ctx, lstart);
                    bld.agent(if agent_end > 0 { np_ending_at(&left, agent_end - 1) } else { None });
                    let lead = leading_np(&ctx, &right);
                    bld.autonym_or_placeholder(lead.map(|x| x.0));
                    let after = lead.map_or(b + 1, |(s, _)| s.1 + 1);
                    bld.info(remainder(&ctx, after), ChunkKind::O);
                    Frame::NameConferral
                }
                _ => {
                    let subject = match v {
                        Voice::Passive => subject_clause(&ctx, lstart),
                        Voice::Participle if a > 1 && ctx.tags[a - 1] == PosTag::Comma => {
                            np_ending_at(&ctx.region(0, a - 1), a - 2)
                        }
                        _ => {
                            let end = skip_adverbs(&ctx, lstart);
                            if end > 0 { np_ending_at(&left, end - 1) } else { None }
                        }
                    };
                    bld.autonym_or_placeholder(subject);
                    bld.info(remainder(&ctx, b + 1), ChunkKind::O);
                    Frame::Unassigned
                }
            }
        }
    };

    for c in left.iter().chain(&right) {
        if c.kind == ChunkKind::NP && !bld.covered(c.span) {
            bld.labeled.push((c.clone(), ConstituentLabel::NounChunk));
        }
    }
    let mut labeled = bld.labeled;
    labeled.sort_by_key(|(c, _)| c.span);
    EmoAnalysis {
        sentence_ref: sentence.reference(),
        matched: m.clone(),
        labeled_chunks: labeled,
        frame,
        flags: bld.flags,
    }
}

/// Analyses every kept match of a sentence in order. A match whose marker
/// token was already claimed as marker material by an earlier analysis is
/// folded into it and yields no analysis of its own.
pub fn analyze_sentence(sentence: &Sentence, tags: &[PosTag], kept: &[TriggerMatch]) -> Vec<(usize, EmoAnalysis)> {
    let mut claimed = BTreeSet::new();
    let mut out = Vec::new();
    for (i, m) in kept.iter().enumerate() {
        if claimed.contains(&m.marker_index) {
            continue;
        }
        let analysis = label_constituents(sentence, tags, m, kept);
        claimed.extend(analysis.marker_tokens());
        out.push((i, analysis));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::{fill_template, MidEntry};
    use crate::patterns::Cascade;
    use crate::tagger::{pos_tag, Tagger};

    fn entries(text: &str) -> Vec<(MidEntry, Frame)> {
        let s = Sentence::from_text("T", 0, text);
        let tags = pos_tag(&s, &Tagger::default());
        let kept = Cascade::default().scan(&s);
        analyze_sentence(&s, &tags, &kept)
            .into_iter()
            .enumerate()
            .map(|(n, (_, a))| (fill_template(&a, &s, n + 1, 1.0), a.frame))
            .collect()
    }

    fn one(text: &str) -> (MidEntry, Frame) {
        let mut e = entries(text);
        assert_eq!(e.len(), 1, "{text}");
        e.remove(0)
    }

    #[test]
    fn appositive_tracheae() {
        let (e, f) = one("This means that they ingest oxygen from the air via fine hollow tubes, known as tracheae.");
        assert_eq!((e.autonym.as_str(), e.information.as_str(), e.markers.as_str()), ("tracheae", "fine hollow tubes", "known as"));
        assert_eq!(f, Frame::NameBearing);
        assert!(e.flags.is_empty());
    }

    #[test]
    fn active_conferral_with_pronoun() {
        let (e, f) = one("Since the shame that was elicited by the coding procedure was seldom explicitly mentioned by the patient or the therapist, Lewis called it unacknowledged shame.");
        assert_eq!(e.autonym, "unacknowledged shame");
        assert_eq!(e.information, "it");
        assert_eq!(e.agent.as_deref(), Some("Lewis"));
        assert!(e.flags.contains(&Flag::AnaphoricUnresolved));
        assert_eq!(f, Frame::NameConferral);
    }

    #[test]
    fn existential_so_called() {
        let (e, _) = one("A so called cell-type-specific TF can be used by closely related cells.");
        assert_eq!(e.autonym, "cell-type-specific TF");
        assert_eq!(e.information, "$x");
        assert_eq!(e.markers, "so called");
        assert!(e.flags.contains(&Flag::ExistentialPlaceholder));
    }

    #[test]
    fn passive_with_quotes() {
        let (e, _) = one("They are called \u{201C}endothermic compounds.\u{201D}");
        assert_eq!(e.autonym, "endothermic compounds");
        assert_eq!(e.information, "They");
        assert_eq!(e.markers, "are called \u{201C} \u{201D}");
        let (e, _) = one("The bit sequences representing quanta of knowledge will be called \u{201C}Kenes\u{201D}, a neologism intentionally similar to 'genes' .");
        assert_eq!(e.information, "The bit sequences representing quanta of knowledge");
        assert_eq!(e.autonym, "Kenes");
        assert_eq!(e.markers, "will be called \u{201C} \u{201D}");
    }

    #[test]
    fn descriptor_absorbs_coined() {
        let (e, _) = one("In 1965 the term soliton was coined to describe waves with this remarkable behaviour.");
        assert_eq!(e.autonym, "soliton");
        assert_eq!(e.information, "to describe waves with this remarkable behaviour");
        assert_eq!(e.markers, "the term was coined");
    }

    #[test]
    fn free_relative_and_sortal() {
        let (e, _) = one("This leap brings cultural citizenship in line with what has been called the politics of citizenship .");
        assert_eq!((e.autonym.as_str(), e.information.as_str()), ("politics of citizenship", "what"));
        assert!(e.flags.contains(&Flag::AnaphoricUnresolved));
        let (e, _) = one("One of the most enduring aspects of all social theories are those conceptual entities known as structures or groups.");
        assert_eq!((e.autonym.as_str(), e.information.as_str()), ("structures or groups", "those conceptual entities"));
        assert!(e.flags.contains(&Flag::Sortal));
    }

    #[test]
    fn fronted_object_and_acronym() {
        let (e, _) = one("Each verb creates what Croft calls a description constraint.");
        assert_eq!((e.autonym.as_str(), e.information.as_str()), ("description constraint", "what"));
        assert_eq!(e.agent.as_deref(), Some("Croft"));
        let (e, _) = one("This protein, known as tumor necrosis factor (TNF), regulates inflammation.");
        assert_eq!((e.autonym.as_str(), e.information.as_str()), ("tumor necrosis factor (TNF)", "This protein"));
    }

    #[test]
    fn passive_agent() {
        let (e, f) = one("This pattern was termed canalization by Waddington.");
        assert_eq!((e.autonym.as_str(), e.information.as_str()), ("canalization", "This pattern"));
        assert_eq!(e.agent.as_deref(), Some("Waddington"));
        assert_eq!(f, Frame::NameConferral);
    }
}
