//! Lexicon-plus-transformation-rules part-of-speech tagger, a regex-over-tags
//! chunker and adjacency-based PP attachment.
//!
//! Tagging runs in two passes. Every token first receives its most
//! frequent lexicon tag (or an unknown-word guess), then the ordered
//! transformation rules rewrite tags in place, each rule sweeping the
//! sentence left to right.

mod chunk;
mod tagset;

use std::collections::HashMap;
use std::str::FromStr;

pub use chunk::{attach_pp, chunk, chunk_range, Chunk, ChunkKind, ATTACHING_PREPOSITIONS};
pub use tagset::PosTag;

use crate::corpus::{Sentence, Token};
use crate::error::{Error, Result};

pub const DEFAULT_LEXICON: &str = include_str!("../../resources/lexicon.tsv");
pub const DEFAULT_RULES: &str = include_str!("../../resources/rules.txt");

/// Word to candidate tags, most frequent first.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashMap<String, Vec<PosTag>>,
}

impl Lexicon {
    /// Parses `word TAB tag1,tag2,...` lines.
    pub fn parse(content: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        for (n, line) in content.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, tags) = line
                .split_once('\t')
                .ok_or_else(|| Error::syntax("lexicon", n + 1, "expected `word TAB tags`"))?;
            let tags = tags
                .split(',')
                .map(|t| PosTag::from_str(t.trim()).map_err(|e| Error::syntax("lexicon", n + 1, e)))
                .collect::<Result<Vec<_>>>()?;
            if word.is_empty() || tags.is_empty() {
                return Err(Error::syntax("lexicon", n + 1, "empty word or tag list"));
            }
            entries.insert(word.to_string(), tags);
        }
        Ok(Lexicon { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Replaces (or adds) one entry.
    pub fn set(&mut self, word: &str, tags: Vec<PosTag>) {
        self.entries.insert(word.to_string(), tags);
    }

    /// Exact surface first, then its lowercase form.
    pub fn lookup(&self, word: &str) -> Option<&[PosTag]> {
        self.entries
            .get(word)
            .or_else(|| self.entries.get(&word.to_lowercase()))
            .map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Template {
    PrevTag(PosTag),
    NextTag(PosTag),
    Prev2Tag(PosTag),
    Next2Tag(PosTag),
    Prev1Or2Tag(PosTag),
    Next1Or2Tag(PosTag),
    Prev1Or2Or3Tag(PosTag),
    Next1Or2Or3Tag(PosTag),
    SurroundTag(PosTag, PosTag),
    PrevBigram(PosTag, PosTag),
    NextBigram(PosTag, PosTag),
    PrevWd(String),
    NextWd(String),
    CurWd(String),
    Prev1Or2Wd(String),
    Next1Or2Wd(String),
    WdPrevTag(PosTag, String),
    WdNextTag(String, PosTag),
}

/// `from -> to` when the context template holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformationRule {
    pub from: PosTag,
    pub to: PosTag,
    pub template: Template,
}

impl TransformationRule {
    /// Parses Brill notation: `FROM TO TEMPLATE ARG [ARG]`.
    pub fn parse(line: &str) -> std::result::Result<Self, String> {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 4 {
            return Err("expected `FROM TO TEMPLATE ARG [ARG]`".into());
        }
        let tag = |s: &str| PosTag::from_str(s);
        let from = tag(f[0])?;
        let to = tag(f[1])?;
        if from == to {
            return Err("rule does not change the tag".into());
        }
        let two = || f.get(4).copied().ok_or_else(|| format!("{} takes two arguments", f[2]));
        let word = |s: &str| s.to_lowercase();
        let template = match f[2] {
            "PREVTAG" => Template::PrevTag(tag(f[3])?),
            "NEXTTAG" => Template::NextTag(tag(f[3])?),
            "PREV2TAG" => Template::Prev2Tag(tag(f[3])?),
            "NEXT2TAG" => Template::Next2Tag(tag(f[3])?),
            "PREV1OR2TAG" => Template::Prev1Or2Tag(tag(f[3])?),
            "NEXT1OR2TAG" => Template::Next1Or2Tag(tag(f[3])?),
            "PREV1OR2OR3TAG" => Template::Prev1Or2Or3Tag(tag(f[3])?),
            "NEXT1OR2OR3TAG" => Template::Next1Or2Or3Tag(tag(f[3])?),
            "SURROUNDTAG" => Template::SurroundTag(tag(f[3])?, tag(two()?)?),
            "PREVBIGRAM" => Template::PrevBigram(tag(f[3])?, tag(two()?)?),
            "NEXTBIGRAM" => Template::NextBigram(tag(f[3])?, tag(two()?)?),
            "PREVWD" => Template::PrevWd(word(f[3])),
            "NEXTWD" => Template::NextWd(word(f[3])),
            "CURWD" => Template::CurWd(word(f[3])),
            "PREV1OR2WD" => Template::Prev1Or2Wd(word(f[3])),
            "NEXT1OR2WD" => Template::Next1Or2Wd(word(f[3])),
            "WDPREVTAG" => Template::WdPrevTag(tag(f[3])?, word(two()?)),
            "WDNEXTTAG" => Template::WdNextTag(word(f[3]), tag(two()?)?),
            other => return Err(format!("unknown template `{other}`")),
        };
        Ok(TransformationRule { from, to, template })
    }

    fn applies(&self, i: usize, words: &[String], tags: &[PosTag]) -> bool {
        let tag_at = |off: isize| -> Option<PosTag> {
            let j = i as isize + off;
            (j >= 0).then(|| tags.get(j as usize).copied()).flatten()
        };
        let word_at = |off: isize| -> Option<&str> {
            let j = i as isize + off;
            (j >= 0).then(|| words.get(j as usize).map(String::as_str)).flatten()
        };
        let any_tag = |offs: &[isize], t: PosTag| offs.iter().any(|&o| tag_at(o) == Some(t));
        let any_word = |offs: &[isize], w: &str| offs.iter().any(|&o| word_at(o) == Some(w));
        match &self.template {
            Template::PrevTag(t) => tag_at(-1) == Some(*t),
            Template::NextTag(t) => tag_at(1) == Some(*t),
            Template::Prev2Tag(t) => tag_at(-2) == Some(*t),
            Template::Next2Tag(t) => tag_at(2) == Some(*t),
            Template::Prev1Or2Tag(t) => any_tag(&[-1, -2], *t),
            Template::Next1Or2Tag(t) => any_tag(&[1, 2], *t),
            Template::Prev1Or2Or3Tag(t) => any_tag(&[-1, -2, -3], *t),
            Template::Next1Or2Or3Tag(t) => any_tag(&[1, 2, 3], *t),
            Template::SurroundTag(a, b) => tag_at(-1) == Some(*a) && tag_at(1) == Some(*b),
            Template::PrevBigram(a, b) => tag_at(-2) == Some(*a) && tag_at(-1) == Some(*b),
            Template::NextBigram(a, b) => tag_at(1) == Some(*a) && tag_at(2) == Some(*b),
            Template::PrevWd(w) => word_at(-1) == Some(w),
            Template::NextWd(w) => word_at(1) == Some(w),
            Template::CurWd(w) => word_at(0) == Some(w),
            Template::Prev1Or2Wd(w) => any_word(&[-1, -2], w),
            Template::Next1Or2Wd(w) => any_word(&[1, 2], w),
            Template::WdPrevTag(t, w) => word_at(0) == Some(w) && tag_at(-1) == Some(*t),
            Template::WdNextTag(w, t) => word_at(0) == Some(w) && tag_at(1) == Some(*t),
        }
    }
}

/// Parses a rule file, one rule per line, `#` comments.
pub fn parse_rules(content: &str) -> Result<Vec<TransformationRule>> {
    content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(n, l)| TransformationRule::parse(l).map_err(|e| Error::syntax("rules", n + 1, e)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Tagger {
    pub lexicon: Lexicon,
    pub rules: Vec<TransformationRule>,
}

impl Default for Tagger {
    fn default() -> Self {
        Tagger::from_sources(DEFAULT_LEXICON, DEFAULT_RULES).expect("bundled tagger resources are valid")
    }
}

fn punct_tag(token: &Token, tokens: &[Token]) -> Option<PosTag> {
    if token.is_quote() {
        let i = token.index;
        let opens_word = tokens.get(i + 1).is_some_and(|n| n.span.0 == token.span.1 && !n.is_punct());
        let after_space = i == 0 || tokens[i - 1].span.1 < token.span.0 || tokens[i - 1].is_quote();
        return Some(if opens_word && after_space {
            PosTag::OpenQuote
        } else {
            PosTag::CloseQuote
        });
    }
    Some(match token.form.as_str() {
        "," => PosTag::Comma,
        "." | "!" | "?" => PosTag::Period,
        ":" | ";" | "..." | "\u{2026}" | "-" | "--" => PosTag::Colon,
        "(" | "[" => PosTag::LeftParen,
        ")" | "]" => PosTag::RightParen,
        "#" => PosTag::Hash,
        "$" => PosTag::Dollar,
        _ => return None,
    })
}

fn is_number(word: &str) -> bool {
    word.chars().any(|c| c.is_ascii_digit())
        && word.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | '-' | '/'))
}

impl Tagger {
    pub fn new(lexicon: Lexicon, rules: Vec<TransformationRule>) -> Self {
        Tagger { lexicon, rules }
    }

    pub fn from_sources(lexicon: &str, rules: &str) -> Result<Self> {
        Ok(Tagger::new(Lexicon::parse(lexicon)?, parse_rules(rules)?))
    }

    fn initial_tag(&self, token: &Token, tokens: &[Token], sentence_initial: bool) -> PosTag {
        if let Some(tag) = punct_tag(token, tokens) {
            return tag;
        }
        if let Some(tags) = self.lexicon.lookup(&token.surface) {
            return tags[0];
        }
        if is_number(&token.surface) {
            return PosTag::CD;
        }
        let capitalized = token.surface.chars().next().is_some_and(char::is_uppercase);
        if capitalized && !sentence_initial {
            PosTag::NNP
        } else {
            PosTag::NN
        }
    }

    pub fn tag_tokens(&self, tokens: &[Token]) -> Vec<PosTag> {
        let first_word = tokens.iter().position(|t| !t.is_punct());
        let mut tags: Vec<PosTag> = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| self.initial_tag(t, tokens, Some(i) == first_word))
            .collect();
        let words: Vec<String> = tokens.iter().map(Token::lower).collect();
        for rule in &self.rules {
            for i in 0..tags.len() {
                if tags[i] == rule.from && rule.applies(i, &words, &tags) {
                    tags[i] = rule.to;
                }
            }
        }
        tags
    }
}

pub fn pos_tag(sentence: &Sentence, tagger: &Tagger) -> Vec<PosTag> {
    tagger.tag_tokens(&sentence.tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags(text: &str, tagger: &Tagger) -> Vec<&'static str> {
        pos_tag(&Sentence::from_text("t", 0, text), tagger)
            .into_iter()
            .map(PosTag::as_str)
            .collect()
    }

    #[test]
    fn closed_class_and_unknowns() {
        let tagger = Tagger::default();
        assert_eq!(tags("the", &tagger), ["DT"]);
        assert_eq!(tags("The", &tagger), ["DT"]);
        let t = tags("will be called \u{201C}Kenes\u{201D}", &tagger);
        assert_eq!(t[3], "``");
        assert_eq!(t[4], "NNP");
        assert_eq!(t[5], "''");
        // unknown capitalized but sentence-initial
        assert_eq!(tags("Zorblax ran", &tagger)[0], "NN");
        assert_eq!(tags("zorblax", &tagger), ["NN"]);
        assert_eq!(tags("1971", &tagger), ["CD"]);
    }

    #[test]
    fn rules_apply_in_order_left_to_right() {
        let lexicon = Lexicon::parse("a\tDT\nb\tNN\nc\tNN\n").unwrap();
        let rules = parse_rules("NN VB PREVTAG DT\nVB JJ NEXTTAG NN\n").unwrap();
        let tagger = Tagger::new(lexicon, rules);
        // b: NN -> VB (after DT), then VB -> JJ (before NN c)
        assert_eq!(tags("a b c", &tagger), ["DT", "JJ", "NN"]);
        // in-place sweep: the second NN sees the updated tag of the first
        let rules = parse_rules("NN DT PREVTAG DT").unwrap();
        let tagger = Tagger::new(Lexicon::parse("a\tDT\nb\tNN\n").unwrap(), rules);
        assert_eq!(tags("a b b", &tagger), ["DT", "DT", "DT"]);
    }

    #[test]
    fn rule_parse_errors() {
        assert!(TransformationRule::parse("NN NN PREVTAG DT").is_err());
        assert!(TransformationRule::parse("NN VB BOGUS DT").is_err());
        assert!(TransformationRule::parse("NN VB SURROUNDTAG DT").is_err());
        assert!(TransformationRule::parse("XX VB PREVTAG DT").is_err());
        let r = TransformationRule::parse("VBD VBN PREV1OR2WD been").unwrap();
        assert_eq!(r.template, Template::Prev1Or2Wd("been".into()));
        let err = parse_rules("NN VB PREVTAG DT\nbad").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn lexicon_errors() {
        assert!(Lexicon::parse("word").is_err());
        assert!(Lexicon::parse("word\tQQ").is_err());
    }
}
