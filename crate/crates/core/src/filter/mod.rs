//! Candidate filtering: hand-coded collocation rules or trained classifiers
//! over positional context features.

mod collocation;
mod maxent;
mod model;
mod naive_bayes;
mod sweep;

use std::fmt;
use std::str::FromStr;

pub use collocation::{
    apply_collocation_filter, parse_collocations, CollocationRule, Decision, Side, DEFAULT_COLLOCATIONS,
};
pub use maxent::{feature_expectations, train_maxent, MaxEntModel, Method, TrainOptions, TrainReport};
pub use model::{classify, load_model, save_model, Model, ModelHeader};
pub use naive_bayes::{train_nb, NaiveBayesModel};
pub use sweep::{evaluate_sweep, split_held_out, Algorithm, Instance, SplitMode, SweepGrid, SweepRow};

use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::patterns::TriggerMatch;
use crate::tagger::PosTag;

/// Padding item for context positions past a sentence edge.
pub const BOUNDARY: &str = "BOUNDARY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Yes,
    No,
}

impl Label {
    pub fn is_yes(self) -> bool {
        self == Label::Yes
    }

    pub fn flip(self) -> Label {
        match self {
            Label::Yes => Label::No,
            Label::No => Label::Yes,
        }
    }

    pub(crate) fn slot(self) -> usize {
        match self {
            Label::Yes => 0,
            Label::No => 1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_yes() { "YES" } else { "NO" })
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "YES" | "yes" => Ok(Label::Yes),
            "NO" | "no" => Ok(Label::No),
            _ => Err(format!("unknown label `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureKind {
    Pos,
    Word,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureKind::Pos => "POS",
            FeatureKind::Word => "WORD",
        })
    }
}

impl FromStr for FeatureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "POS" => Ok(FeatureKind::Pos),
            "WORD" => Ok(FeatureKind::Word),
            _ => Err(format!("unknown feature kind `{s}`")),
        }
    }
}

/// Context around a marker: `left` runs from the farthest position to the
/// nearest, `right` from the nearest outward.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureVector {
    pub left: Vec<String>,
    pub marker: String,
    pub right: Vec<String>,
    pub kind: FeatureKind,
    pub width: usize,
}

impl FeatureVector {
    /// `(offset, value)` pairs; the marker sits at offset 0.
    pub fn features(&self) -> Vec<(i32, &str)> {
        let w = self.left.len() as i32;
        let mut out = Vec::with_capacity(self.left.len() + 1 + self.right.len());
        out.extend(self.left.iter().enumerate().map(|(i, v)| (i as i32 - w, v.as_str())));
        out.push((0, self.marker.as_str()));
        out.extend(self.right.iter().enumerate().map(|(i, v)| (i as i32 + 1, v.as_str())));
        out
    }

    pub fn shape(&self) -> (FeatureKind, usize) {
        (self.kind, self.width)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledExample {
    pub vector: FeatureVector,
    pub label: Label,
}

pub fn check_width(width: usize) -> Result<()> {
    if (1..=3).contains(&width) {
        Ok(())
    } else {
        Err(Error::Config(format!("width must be 1, 2 or 3, got {width}")))
    }
}

/// Builds the context vector around `m.marker_index`.
pub fn featurize(
    sentence: &Sentence,
    m: &TriggerMatch,
    kind: FeatureKind,
    width: usize,
    tags: Option<&[PosTag]>,
) -> Result<FeatureVector> {
    check_width(width)?;
    let n = sentence.len();
    let at = m.marker_index;
    if at >= n {
        return Err(Error::MarkerOutOfRange { index: at, len: n });
    }
    let item: Box<dyn Fn(usize) -> String> = match kind {
        FeatureKind::Word => Box::new(|i| sentence.tokens[i].lower()),
        FeatureKind::Pos => {
            let tags = tags.ok_or_else(|| Error::Config("POS features need a tag sequence".into()))?;
            if tags.len() != n {
                return Err(Error::Config(format!("{} tags for {n} tokens", tags.len())));
            }
            Box::new(move |i| tags[i].as_str().to_string())
        }
    };
    let context = |i: isize| {
        if i < 0 || i as usize >= n {
            BOUNDARY.to_string()
        } else {
            item(i as usize)
        }
    };
    let at = at as isize;
    let w = width as isize;
    Ok(FeatureVector {
        left: (at - w..at).map(context).collect(),
        marker: sentence.tokens[at as usize].lower(),
        right: (at + 1..=at + w).map(context).collect(),
        kind,
        width,
    })
}

/// Checks that every example shares one kind and width.
pub(crate) fn common_shape(examples: &[LabeledExample]) -> Result<(FeatureKind, usize)> {
    let first = examples.first().ok_or(Error::SingleLabel)?.vector.shape();
    if examples.iter().any(|e| e.vector.shape() != first) {
        return Err(Error::MixedFeatures);
    }
    let yes = examples.iter().filter(|e| e.label.is_yes()).count();
    if yes == 0 || yes == examples.len() {
        return Err(Error::SingleLabel);
    }
    Ok(first)
}

/// Reads `label TAB kind TAB width TAB left TAB marker TAB right` lines.
pub fn parse_examples(content: &str) -> Result<Vec<LabeledExample>> {
    const FILE: &str = "examples";
    let mut out = Vec::new();
    for (n, line) in content.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: String| Error::syntax(FILE, n + 1, m);
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 6 {
            return Err(err(format!("expected 6 tab-separated fields, got {}", f.len())));
        }
        let label = f[0].parse().map_err(err)?;
        let kind = f[1].parse().map_err(err)?;
        let width: usize = f[2].parse().map_err(|_| err(format!("bad width `{}`", f[2])))?;
        check_width(width).map_err(|e| err(e.to_string()))?;
        let items = |s: &str| s.split_whitespace().map(str::to_string).collect::<Vec<_>>();
        let (left, right) = (items(f[3]), items(f[5]));
        if left.len() != width || right.len() != width {
            return Err(err(format!("context lists must hold {width} items")));
        }
        let marker = f[4].trim();
        if marker.is_empty() {
            return Err(err("empty marker".into()));
        }
        out.push(LabeledExample {
            vector: FeatureVector {
                left,
                marker: marker.to_string(),
                right,
                kind,
                width,
            },
            label,
        });
    }
    Ok(out)
}

pub fn format_example(e: &LabeledExample) -> String {
    let v = &e.vector;
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}",
        e.label,
        v.kind,
        v.width,
        v.left.join(" "),
        v.marker,
        v.right.join(" ")
    )
}
