//! Trigger-pattern inventory and the token-level matcher cascade.
//!
//! A pattern file is line oriented:
//!
//! ```text
//! # comment
//! known_as: @"known" "as"
//! called_quote: {called|call|calls} QUOTE priority=2
//! the_term: "the" @{term|terms} category=descriptor
//! ```
//!
//! Atoms are `"literal"`, `{alt1|alt2}` or `QUOTE` (any quotation mark).
//! The head marker is the atom prefixed with `@`, or the first lexical atom
//! when no atom carries the prefix. Patterns compile into one deterministic
//! trie automaton over normalized tokens; scanning keeps the leftmost,
//! longest match at each point, ties going to higher priority and then to
//! the earlier line.

use std::collections::{BTreeSet, HashMap};

use crate::corpus::{segment_sentences, Document, Sentence, SentenceRef, Token};
use crate::error::{Error, Result};

pub const DEFAULT_PATTERNS: &str = include_str!("../resources/patterns.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    /// One or more lowercase surface alternatives.
    Lexeme(BTreeSet<String>),
    Quote,
}

impl Atom {
    fn matches(&self, token: &Token) -> bool {
        match self {
            Atom::Quote => token.is_quote(),
            Atom::Lexeme(alts) => !token.is_quote() && alts.contains(&token.lower()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    VerbMarker,
    DescriptorMarker,
    Mixed,
}

impl Category {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "verb" => Some(Category::VerbMarker),
            "descriptor" => Some(Category::DescriptorMarker),
            "mixed" => Some(Category::Mixed),
            _ => None,
        }
    }
}

const DESCRIPTOR_NOUNS: &[&str] = &["term", "terms", "word", "words", "expression", "name"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerPattern {
    pub id: String,
    pub sequence: Vec<Atom>,
    /// Position of the head marker within `sequence`.
    pub marker_position: usize,
    pub category: Category,
    pub priority: i32,
}

impl TriggerPattern {
    pub fn marker_lexemes(&self) -> &BTreeSet<String> {
        match &self.sequence[self.marker_position] {
            Atom::Lexeme(alts) => alts,
            Atom::Quote => unreachable!("marker atoms are lexical"),
        }
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerMatch {
    pub pattern_id: String,
    pub category: Category,
    pub sentence_ref: SentenceRef,
    /// Inclusive token indices `(first, last)`.
    pub token_span: (usize, usize),
    pub marker_index: usize,
}

impl TriggerMatch {
    pub fn contains(&self, index: usize) -> bool {
        self.token_span.0 <= index && index <= self.token_span.1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmoCandidate {
    pub sentence: Sentence,
    pub matches: Vec<TriggerMatch>,
}

#[derive(Debug, Default, Clone)]
struct Node {
    words: HashMap<String, usize>,
    quote: Option<usize>,
    /// Pattern indices accepted here.
    accepts: Vec<usize>,
}

/// Compiled, immutable matcher over a pattern inventory.
#[derive(Debug, Clone)]
pub struct Cascade {
    patterns: Vec<TriggerPattern>,
    nodes: Vec<Node>,
}

fn parse_atoms(file: &str, line_no: usize, body: &str) -> Result<(Vec<Atom>, Option<usize>, i32, Option<Category>)> {
    let err = |m: String| Error::syntax(file, line_no, m);
    let mut atoms = Vec::new();
    let mut marker = None;
    let mut priority = 0;
    let mut category = None;
    let mut rest = body.trim_start();
    while !rest.is_empty() {
        let mut flagged = false;
        if let Some(r) = rest.strip_prefix('@') {
            flagged = true;
            rest = r;
        }
        let (atom, after) = if let Some(r) = rest.strip_prefix('"') {
            let end = r.find('"').ok_or_else(|| err("unterminated literal".into()))?;
            let lit = r[..end].trim().to_lowercase();
            if lit.is_empty() || lit.contains(char::is_whitespace) {
                return Err(err(format!("literal `{lit}` must be a single non-empty token")));
            }
            (Some(Atom::Lexeme(BTreeSet::from([lit]))), &r[end + 1..])
        } else if let Some(r) = rest.strip_prefix('{') {
            let end = r.find('}').ok_or_else(|| err("unterminated alternative set".into()))?;
            let alts: BTreeSet<String> = r[..end].split('|').map(|a| a.trim().to_lowercase()).collect();
            if alts.iter().any(|a| a.is_empty() || a.contains(char::is_whitespace)) {
                return Err(err("empty or multi-word alternative".into()));
            }
            (Some(Atom::Lexeme(alts)), &r[end + 1..])
        } else {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            let word = &rest[..end];
            let atom = if word == "QUOTE" {
                Some(Atom::Quote)
            } else if let Some(v) = word.strip_prefix("priority=") {
                priority = v.parse().map_err(|_| err(format!("bad priority `{v}`")))?;
                None
            } else if let Some(v) = word.strip_prefix("category=") {
                category = Some(Category::parse(v).ok_or_else(|| err(format!("unknown category `{v}`")))?);
                None
            } else {
                return Err(err(format!("unrecognized atom `{word}`")));
            };
            (atom, &rest[end..])
        };
        match atom {
            Some(a) => {
                if flagged {
                    if marker.is_some() {
                        return Err(err("more than one `@` marker atom".into()));
                    }
                    if a == Atom::Quote {
                        return Err(err("QUOTE cannot be the marker".into()));
                    }
                    marker = Some(atoms.len());
                }
                atoms.push(a);
            }
            None if flagged => return Err(err("`@` must precede an atom".into())),
            None => {}
        }
        rest = after.trim_start();
    }
    Ok((atoms, marker, priority, category))
}

/// Parses pattern-file content into an ordered pattern list.
pub fn parse_patterns(content: &str) -> Result<Vec<TriggerPattern>> {
    const FILE: &str = "pattern spec";
    let mut patterns: Vec<TriggerPattern> = Vec::new();
    for (n, raw) in content.lines().enumerate() {
        let line_no = n + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (id, body) = line
            .split_once(':')
            .ok_or_else(|| Error::syntax(FILE, line_no, "expected `id: atom atom ...`"))?;
        let id = id.trim();
        if id.is_empty() || id.contains(char::is_whitespace) {
            return Err(Error::syntax(FILE, line_no, format!("bad pattern id `{id}`")));
        }
        let (sequence, marker, priority, category) = parse_atoms(FILE, line_no, body)?;
        if sequence.is_empty() {
            return Err(Error::syntax(FILE, line_no, "pattern has no atoms"));
        }
        let marker_position = match marker {
            Some(m) => m,
            None => sequence
                .iter()
                .position(|a| matches!(a, Atom::Lexeme(_)))
                .ok_or_else(|| Error::syntax(FILE, line_no, "pattern needs a lexical atom"))?,
        };
        if patterns.iter().any(|p| p.id == id) {
            return Err(Error::DuplicatePattern(id.to_string()));
        }
        let category = category.unwrap_or_else(|| {
            let Atom::Lexeme(alts) = &sequence[marker_position] else { unreachable!() };
            if alts.iter().all(|a| DESCRIPTOR_NOUNS.contains(&a.as_str())) {
                Category::DescriptorMarker
            } else if sequence.contains(&Atom::Quote) {
                Category::Mixed
            } else {
                Category::VerbMarker
            }
        });
        patterns.push(TriggerPattern {
            id: id.to_string(),
            sequence,
            marker_position,
            category,
            priority,
        });
    }
    Ok(patterns)
}

/// Parses and compiles pattern-file content.
pub fn compile_patterns(content: &str) -> Result<Cascade> {
    Ok(Cascade::new(parse_patterns(content)?))
}

impl Default for Cascade {
    /// The bundled inventory.
    fn default() -> Self {
        compile_patterns(DEFAULT_PATTERNS).expect("bundled pattern file is valid")
    }
}

impl Cascade {
    pub fn new(patterns: Vec<TriggerPattern>) -> Self {
        let mut nodes = vec![Node::default()];
        for (p_idx, pattern) in patterns.iter().enumerate() {
            let mut frontier = vec![0usize];
            for atom in &pattern.sequence {
                let mut next = Vec::new();
                for &state in &frontier {
                    match atom {
                        Atom::Quote => {
                            let child = match nodes[state].quote {
                                Some(c) => c,
                                None => {
                                    nodes.push(Node::default());
                                    let c = nodes.len() - 1;
                                    nodes[state].quote = Some(c);
                                    c
                                }
                            };
                            next.push(child);
                        }
                        Atom::Lexeme(alts) => {
                            for alt in alts {
                                let child = match nodes[state].words.get(alt) {
                                    Some(&c) => c,
                                    None => {
                                        nodes.push(Node::default());
                                        let c = nodes.len() - 1;
                                        nodes[state].words.insert(alt.clone(), c);
                                        c
                                    }
                                };
                                next.push(child);
                            }
                        }
                    }
                }
                next.sort_unstable();
                next.dedup();
                frontier = next;
            }
            for state in frontier {
                nodes[state].accepts.push(p_idx);
            }
        }
        Cascade { patterns, nodes }
    }

    pub fn patterns(&self) -> &[TriggerPattern] {
        &self.patterns
    }

    pub fn pattern(&self, id: &str) -> Option<&TriggerPattern> {
        self.patterns.iter().find(|p| p.id == id)
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Best pattern (by length, priority, file order) starting at `start`.
    fn best_at(&self, tokens: &[Token], start: usize) -> Option<(usize, usize)> {
        let mut state = 0;
        let mut best: Option<(usize, usize)> = None;
        for (offset, token) in tokens[start..].iter().enumerate() {
            let node = &self.nodes[state];
            let next = if token.is_quote() {
                node.quote
            } else {
                node.words.get(&token.lower()).copied()
            };
            let Some(next) = next else { break };
            state = next;
            let len = offset + 1;
            for &p in &self.nodes[state].accepts {
                let better = match best {
                    None => true,
                    Some((b, blen)) => {
                        len > blen
                            || (len == blen && self.patterns[p].priority > self.patterns[b].priority)
                            || (len == blen && self.patterns[p].priority == self.patterns[b].priority && p < b)
                    }
                };
                if better {
                    best = Some((p, len));
                }
            }
        }
        best
    }

    /// All non-overlapping matches in `sentence`, left to right.
    pub fn scan(&self, sentence: &Sentence) -> Vec<TriggerMatch> {
        let tokens = &sentence.tokens;
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            match self.best_at(tokens, i) {
                Some((p, len)) => {
                    let pattern = &self.patterns[p];
                    debug_assert!(pattern.sequence.iter().zip(&tokens[i..i + len]).all(|(a, t)| a.matches(t)));
                    out.push(TriggerMatch {
                        pattern_id: pattern.id.clone(),
                        category: pattern.category,
                        sentence_ref: sentence.reference(),
                        token_span: (i, i + len - 1),
                        marker_index: i + pattern.marker_position,
                    });
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }

    pub fn candidates(&self, sentences: &[Sentence]) -> Vec<EmoCandidate> {
        sentences
            .iter()
            .filter_map(|s| {
                let matches = self.scan(s);
                (!matches.is_empty()).then(|| EmoCandidate {
                    sentence: s.clone(),
                    matches,
                })
            })
            .collect()
    }
}

/// Segments `doc` and keeps the sentences with at least one trigger match.
pub fn extract_candidates(doc: &Document, cascade: &Cascade) -> Vec<EmoCandidate> {
    cascade.candidates(&segment_sentences(doc))
}
