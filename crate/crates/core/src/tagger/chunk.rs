use crate::corpus::Token;

use super::PosTag;

/// Prepositions whose phrases attach to an immediately preceding NP.
pub const ATTACHING_PREPOSITIONS: &[&str] = &["of", "for", "in", "with", "on"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChunkKind {
    NP,
    VP,
    PP,
    O,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub kind: ChunkKind,
    /// Inclusive token indices.
    pub span: (usize, usize),
    pub head: usize,
    /// For an attached PP, the index (in the chunk list) of the NP it modifies.
    pub attached_to: Option<usize>,
}

impl Chunk {
    pub fn new(kind: ChunkKind, first: usize, last: usize, head: usize) -> Self {
        Chunk {
            kind,
            span: (first, last),
            head,
            attached_to: None,
        }
    }

    /// The object noun phrase of a PP.
    pub fn object_span(&self) -> Option<(usize, usize)> {
        (self.kind == ChunkKind::PP && self.span.1 > self.span.0).then_some((self.span.0 + 1, self.span.1))
    }
}

/// `(JJ|JJR|JJS|VBN|VBG|CD)* (NN|NNS|NNP|NNPS)+` from `i`; returns the end
/// (exclusive) and the rightmost noun.
fn nominal(tags: &[PosTag], mut i: usize, end: usize) -> Option<(usize, usize)> {
    while i < end && tags[i].is_modifier() {
        i += 1;
    }
    let start = i;
    while i < end && tags[i].is_noun() {
        i += 1;
    }
    (i > start).then(|| (i, i - 1))
}

/// `` nominal ''
fn quoted_nominal(tags: &[PosTag], i: usize, end: usize) -> Option<(usize, usize)> {
    if i < end && tags[i] == PosTag::OpenQuote {
        let (j, head) = nominal(tags, i + 1, end)?;
        if j < end && tags[j] == PosTag::CloseQuote {
            return Some((j + 1, head));
        }
    }
    None
}

fn np_at(tags: &[PosTag], i: usize, end: usize) -> Option<(usize, usize)> {
    if tags[i] == PosTag::PRP {
        return Some((i + 1, i));
    }
    if let Some(q) = quoted_nominal(tags, i, end) {
        return Some(q);
    }
    let j = if matches!(tags[i], PosTag::DT | PosTag::PRPS) { i + 1 } else { i };
    let (mut k, mut head) = nominal(tags, j, end)?;
    if let Some((q, qhead)) = quoted_nominal(tags, k, end) {
        k = q;
        head = qhead;
    }
    Some((k, head))
}

fn vp_at(tags: &[PosTag], mut i: usize, end: usize) -> Option<(usize, usize)> {
    let start = i;
    while i < end && tags[i].is_verb() {
        i += 1;
    }
    if i == start {
        return None;
    }
    let head = i - 1;
    while i < end && tags[i] == PosTag::RB {
        i += 1;
    }
    Some((i, head))
}

fn pp_at(tags: &[PosTag], i: usize, end: usize) -> Option<(usize, usize)> {
    if tags[i] != PosTag::IN || i + 1 >= end {
        return None;
    }
    np_at(tags, i + 1, end).map(|(k, _)| (k, i))
}

/// Chunks tokens `start..end`; indices in the result are sentence-level.
pub fn chunk_range(tags: &[PosTag], start: usize, end: usize) -> Vec<Chunk> {
    let mut chunks = Vec::new();
    let mut i = start;
    while i < end {
        // longest wins; NP before PP before VP on equal length
        let candidates = [
            (ChunkKind::NP, np_at(tags, i, end)),
            (ChunkKind::PP, pp_at(tags, i, end)),
            (ChunkKind::VP, vp_at(tags, i, end)),
        ];
        let best = candidates
            .into_iter()
            .filter_map(|(kind, m)| m.map(|(k, head)| (kind, k, head)))
            .fold(None::<(ChunkKind, usize, usize)>, |acc, c| match acc {
                Some(a) if a.1 >= c.1 => Some(a),
                _ => Some(c),
            });
        match best {
            Some((kind, k, head)) => {
                chunks.push(Chunk::new(kind, i, k - 1, head));
                i = k;
            }
            None => {
                chunks.push(Chunk::new(ChunkKind::O, i, i, i));
                i += 1;
            }
        }
    }
    chunks
}

/// Greedy left-to-right shallow parse of a whole sentence.
pub fn chunk(tokens: &[Token], tags: &[PosTag]) -> Vec<Chunk> {
    assert_eq!(tokens.len(), tags.len(), "tags must align with tokens");
    chunk_range(tags, 0, tags.len())
}

/// Links each PP headed by an attaching preposition to the NP (or the
/// already-extended NP) directly before it.
pub fn attach_pp(mut chunks: Vec<Chunk>, tokens: &[Token]) -> Vec<Chunk> {
    for i in 1..chunks.len() {
        if chunks[i].kind != ChunkKind::PP {
            continue;
        }
        let prep = tokens[chunks[i].head].lower();
        if !ATTACHING_PREPOSITIONS.contains(&prep.as_str()) {
            continue;
        }
        let prev = &chunks[i - 1];
        if prev.span.1 + 1 != chunks[i].span.0 {
            continue;
        }
        let target = match prev.kind {
            ChunkKind::NP => Some(i - 1),
            ChunkKind::PP => prev.attached_to,
            _ => None,
        };
        chunks[i].attached_to = target;
    }
    chunks
}
