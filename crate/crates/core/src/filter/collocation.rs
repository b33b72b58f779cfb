use std::collections::BTreeSet;
use std::fmt;

use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::patterns::TriggerMatch;

pub const DEFAULT_COLLOCATIONS: &str = include_str!("../../resources/collocations.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Preceding,
    Subsequent,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Preceding => "preceding",
            Side::Subsequent => "subsequent",
        })
    }
}

/// Rejects a match whose marker is `marker_lexeme` when one of `words`
/// appears within `window` tokens on `position`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollocationRule {
    pub marker_lexeme: String,
    pub position: Side,
    pub window: usize,
    pub words: BTreeSet<String>,
}

impl CollocationRule {
    pub fn id(&self) -> String {
        format!("{}/{}/{}", self.marker_lexeme, self.position, self.window)
    }

    fn fires(&self, sentence: &Sentence, m: &TriggerMatch) -> bool {
        let tokens = &sentence.tokens;
        if tokens[m.marker_index].lower() != self.marker_lexeme {
            return false;
        }
        let range = match self.position {
            Side::Preceding => m.marker_index.saturating_sub(self.window)..m.marker_index,
            Side::Subsequent => m.marker_index + 1..(m.marker_index + 1 + self.window).min(tokens.len()),
        };
        tokens[range].iter().any(|t| self.words.contains(&t.lower()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Keep,
    Reject(String),
}

impl Decision {
    pub fn is_keep(&self) -> bool {
        *self == Decision::Keep
    }
}

/// Parses `marker TAB side TAB window TAB word,word,...` lines.
pub fn parse_collocations(content: &str) -> Result<Vec<CollocationRule>> {
    const FILE: &str = "collocations";
    let mut rules = Vec::new();
    for (n, line) in content.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: String| Error::syntax(FILE, n + 1, m);
        let f: Vec<&str> = line.split('\t').map(str::trim).collect();
        if f.len() != 4 {
            return Err(err("expected `marker TAB side TAB window TAB words`".into()));
        }
        let position = match f[1] {
            "preceding" => Side::Preceding,
            "subsequent" => Side::Subsequent,
            other => return Err(err(format!("side must be preceding or subsequent, got `{other}`"))),
        };
        let window: usize = f[2].parse().map_err(|_| err(format!("bad window `{}`", f[2])))?;
        if window == 0 {
            return Err(err("window must be at least 1".into()));
        }
        let words: BTreeSet<String> = f[3]
            .split(',')
            .map(|w| w.trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        if words.is_empty() || f[0].is_empty() {
            return Err(err("rule needs a marker and at least one word".into()));
        }
        rules.push(CollocationRule {
            marker_lexeme: f[0].to_lowercase(),
            position,
            window,
            words,
        });
    }
    Ok(rules)
}

/// First rule that fires decides; no rule means keep.
pub fn apply_collocation_filter(sentence: &Sentence, m: &TriggerMatch, rules: &[CollocationRule]) -> Decision {
    rules
        .iter()
        .find(|r| r.fires(sentence, m))
        .map_or(Decision::Keep, |r| Decision::Reject(r.id()))
}
