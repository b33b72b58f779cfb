//! Trained filter models and their versioned text format:
//!
//! ```text
//! mop-model 1
//! model NB            (or GIS / IIS)
//! kind WORD
//! width 1
//! alpha 1             (NB only; MaxEnt writes `C <n>`)
//! date 2026-01-01
//! class YES 12        (NB rows: class counts, then per-value counts)
//! count -1 the 3 0
//! weight -1 the YES 0.25   (MaxEnt rows, in feature-id order)
//! ```
//!
//! Fields are tab separated. Floats use the shortest round-trip form, so a
//! save/load cycle reproduces the model exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{FeatureKind, FeatureVector, Label, MaxEntModel, Method, NaiveBayesModel};
use crate::error::{Error, Result};

const MAGIC: &str = "mop-model";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    NaiveBayes(NaiveBayesModel),
    MaxEnt(MaxEntModel),
}

impl Model {
    pub fn name(&self) -> String {
        match self {
            Model::NaiveBayes(_) => "NB".to_string(),
            Model::MaxEnt(m) => m.method.to_string(),
        }
    }

    pub fn shape(&self) -> (FeatureKind, usize) {
        match self {
            Model::NaiveBayes(m) => (m.kind, m.width),
            Model::MaxEnt(m) => (m.kind, m.width),
        }
    }

    pub fn feature_count(&self) -> usize {
        match self {
            Model::NaiveBayes(m) => m.feature_count(),
            Model::MaxEnt(m) => m.feature_count(),
        }
    }

    pub fn posterior_yes(&self, vector: &FeatureVector) -> f64 {
        match self {
            Model::NaiveBayes(m) => m.posterior_yes(vector),
            Model::MaxEnt(m) => m.posterior_yes(vector),
        }
    }
}

/// YES iff P(YES | vector) > 0.5; returns the label and that probability.
pub fn classify(model: &Model, vector: &FeatureVector) -> Result<(Label, f64)> {
    let (kind, width) = model.shape();
    if vector.shape() != (kind, width) {
        return Err(Error::FeatureMismatch {
            expected: format!("{kind}/{width}"),
            got: format!("{}/{}", vector.kind, vector.width),
        });
    }
    let p = model.posterior_yes(vector);
    Ok((if p > 0.5 { Label::Yes } else { Label::No }, p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelHeader {
    pub version: u32,
    pub model: String,
    pub kind: FeatureKind,
    pub width: usize,
    pub date: String,
}

pub fn save_model(model: &Model, date: &str) -> String {
    let (kind, width) = model.shape();
    let mut out = format!("{MAGIC} {VERSION}\nmodel {}\nkind {kind}\nwidth {width}\n", model.name());
    match model {
        Model::NaiveBayes(m) => {
            let _ = writeln!(out, "alpha {}\ndate {date}", m.alpha);
            let _ = writeln!(out, "class\tYES\t{}\nclass\tNO\t{}", m.class_counts[0], m.class_counts[1]);
            for ((pos, value), c) in &m.counts {
                let _ = writeln!(out, "count\t{pos}\t{value}\t{}\t{}", c[0], c[1]);
            }
        }
        Model::MaxEnt(m) => {
            let _ = writeln!(out, "C {}\ndate {date}", m.gis_constant);
            let mut by_id: Vec<_> = m.feature_index.iter().collect();
            by_id.sort_by_key(|(_, &id)| id);
            for ((pos, value, label), id) in by_id {
                let _ = writeln!(out, "weight\t{pos}\t{value}\t{label}\t{}", m.weights[*id]);
            }
        }
    }
    out
}

pub fn load_model(content: &str) -> Result<(ModelHeader, Model)> {
    let bad = |m: String| Error::Model(m);
    let mut lines = content.lines();
    let mut header = |key: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| bad(format!("missing `{key}` header")))?;
        line.strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| bad(format!("expected `{key}` header, got `{line}`")))
    };
    let version: u32 = header(MAGIC)?.parse().map_err(|_| bad("bad version".into()))?;
    if version != VERSION {
        return Err(bad(format!("unsupported model version {version} (expected {VERSION})")));
    }
    let name = header("model")?;
    let kind: FeatureKind = header("kind")?.parse().map_err(bad)?;
    let width: usize = header("width")?.parse().map_err(|_| bad("bad width".into()))?;
    super::check_width(width)?;
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}`")));
    let model = match name.as_str() {
        "NB" => {
            let alpha = num(&header("alpha")?)?;
            let date = header("date")?;
            let mut class_counts = [0u64; 2];
            let mut counts = BTreeMap::new();
            for line in lines {
                let f: Vec<&str> = line.split('\t').collect();
                let int = |s: &str| s.parse::<u64>().map_err(|_| bad(format!("bad count `{s}`")));
                match f.as_slice() {
                    ["class", label, c] => {
                        let label: Label = label.parse().map_err(bad)?;
                        class_counts[label.slot()] = int(c)?;
                    }
                    ["count", pos, value, yes, no] => {
                        let pos = pos.parse().map_err(|_| bad(format!("bad offset `{pos}`")))?;
                        counts.insert((pos, value.to_string()), [int(yes)?, int(no)?]);
                    }
                    _ => return Err(bad(format!("unexpected row `{line}`"))),
                }
            }
            let m = NaiveBayesModel::from_counts(kind, width, alpha, class_counts, counts);
            (date, Model::NaiveBayes(m))
        }
        "GIS" | "IIS" => {
            let method: Method = name.parse().map_err(bad)?;
            let c: usize = header("C")?.parse().map_err(|_| bad("bad C".into()))?;
            let date = header("date")?;
            let mut feature_index = BTreeMap::new();
            let mut weights = Vec::new();
            for line in lines {
                let f: Vec<&str> = line.split('\t').collect();
                let ["weight", pos, value, label, w] = f.as_slice() else {
                    return Err(bad(format!("unexpected row `{line}`")));
                };
                let pos: i32 = pos.parse().map_err(|_| bad(format!("bad offset `{pos}`")))?;
                let label: Label = label.parse().map_err(bad)?;
                let w = num(w)?;
                if !w.is_finite() {
                    return Err(bad(format!("non-finite weight in `{line}`")));
                }
                if feature_index.insert((pos, value.to_string(), label), weights.len()).is_some() {
                    return Err(bad(format!("duplicate feature in `{line}`")));
                }
                weights.push(w);
            }
            let m = MaxEntModel {
                kind,
                width,
                method,
                feature_index,
                weights,
                gis_constant: c,
            };
            (date, Model::MaxEnt(m))
        }
        other => return Err(bad(format!("unknown model `{other}`"))),
    };
    let (date, model) = model;
    Ok((
        ModelHeader {
            version,
            model: name,
            kind,
            width,
            date,
        },
        model,
    ))
}
