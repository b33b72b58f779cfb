use std::fmt;
use std::str::FromStr;

use super::{classify, featurize, train_maxent, train_nb, FeatureKind, Label, LabeledExample, Method, Model, TrainOptions};
use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::patterns::TriggerMatch;
use crate::tagger::PosTag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    NaiveBayes,
    Gis,
    Iis,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::NaiveBayes, Algorithm::Gis, Algorithm::Iis];

    pub fn train(self, examples: &[LabeledExample], alpha: f64, opts: &TrainOptions) -> Result<Model> {
        Ok(match self {
            Algorithm::NaiveBayes => Model::NaiveBayes(train_nb(examples, alpha)?),
            Algorithm::Gis | Algorithm::Iis => {
                let method = if self == Algorithm::Gis { Method::Gis } else { Method::Iis };
                Model::MaxEnt(train_maxent(examples, &TrainOptions { method, ..*opts })?.0)
            }
        })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::NaiveBayes => "NB",
            Algorithm::Gis => "GIS",
            Algorithm::Iis => "IIS",
        })
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "NB" => Ok(Algorithm::NaiveBayes),
            "GIS" => Ok(Algorithm::Gis),
            "IIS" => Ok(Algorithm::Iis),
            _ => Err(format!("unknown algorithm `{s}`")),
        }
    }
}

/// A trigger match with its tagged sentence and gold label.
#[derive(Debug, Clone)]
pub struct Instance {
    pub sentence: Sentence,
    pub tags: Vec<PosTag>,
    pub matched: TriggerMatch,
    pub label: Label,
}

impl Instance {
    pub fn example(&self, kind: FeatureKind, width: usize) -> Result<LabeledExample> {
        Ok(LabeledExample {
            vector: featurize(&self.sentence, &self.matched, kind, width, Some(&self.tags))?,
            label: self.label,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Every fourth instance is held out for testing.
    HeldOut,
    /// Train and test on the same instances.
    HeldIn,
}

impl fmt::Display for SplitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitMode::HeldOut => "held-out",
            SplitMode::HeldIn => "held-in",
        })
    }
}

/// Deterministic split stratified by label: within each label, in input
/// order, every fourth instance (positions 3, 7, ...) goes to the test side.
pub fn split_held_out(instances: &[Instance]) -> (Vec<Instance>, Vec<Instance>) {
    let mut seen = [0usize; 2];
    let mut train = Vec::new();
    let mut test = Vec::new();
    for inst in instances {
        let n = &mut seen[inst.label.slot()];
        if *n % 4 == 3 {
            test.push(inst.clone());
        } else {
            train.push(inst.clone());
        }
        *n += 1;
    }
    (train, test)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mode: SplitMode,
    pub algorithm: Algorithm,
    pub kind: FeatureKind,
    pub width: usize,
    /// Distinct `(offset, value)` features in the training vectors.
    pub features: usize,
    pub train: usize,
    pub test: usize,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl SweepRow {
    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.test as f64
    }

    pub fn precision(&self) -> Option<f64> {
        (self.tp + self.fp > 0).then(|| self.tp as f64 / (self.tp + self.fp) as f64)
    }

    pub fn recall(&self) -> Option<f64> {
        (self.tp + self.fn_ > 0).then(|| self.tp as f64 / (self.tp + self.fn_) as f64)
    }

    pub const CSV_HEADER: &'static str = "mode,algorithm,kind,width,features,train,test,tp,fp,fn,tn,accuracy,precision,recall";

    pub fn csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("NA".to_string(), |v| format!("{v:.4}"));
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{:.4},{},{}",
            self.mode,
            self.algorithm,
            self.kind,
            self.width,
            self.features,
            self.train,
            self.test,
            self.tp,
            self.fp,
            self.fn_,
            self.tn,
            self.accuracy(),
            opt(self.precision()),
            opt(self.recall())
        )
    }
}

#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub algorithms: Vec<Algorithm>,
    pub kinds: Vec<FeatureKind>,
    pub widths: Vec<usize>,
    pub alpha: f64,
    pub train: TrainOptions,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            algorithms: Algorithm::ALL.to_vec(),
            kinds: vec![FeatureKind::Pos, FeatureKind::Word],
            widths: vec![1, 2, 3],
            alpha: 1.0,
            train: TrainOptions::default(),
        }
    }
}

/// One row per (algorithm, kind, width), in that nesting order.
pub fn evaluate_sweep(train: &[Instance], test: &[Instance], grid: &SweepGrid, mode: SplitMode) -> Result<Vec<SweepRow>> {
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let mut rows = Vec::new();
    for &algorithm in &grid.algorithms {
        for &kind in &grid.kinds {
            for &width in &grid.widths {
                let examples = train.iter().map(|i| i.example(kind, width)).collect::<Result<Vec<_>>>()?;
                let model = algorithm.train(&examples, grid.alpha, &grid.train)?;
                let mut features: Vec<_> = examples
                    .iter()
                    .flat_map(|e| e.vector.features().into_iter().map(|(p, v)| (p, v.to_string())))
                    .collect();
                features.sort();
                features.dedup();
                let mut row = SweepRow {
                    mode,
                    algorithm,
                    kind,
                    width,
                    features: features.len(),
                    train: train.len(),
                    test: test.len(),
                    tp: 0,
                    fp: 0,
                    fn_: 0,
                    tn: 0,
                };
                for inst in test {
                    let (predicted, _) = classify(&model, &inst.example(kind, width)?.vector)?;
                    match (predicted.is_yes(), inst.label.is_yes()) {
                        (true, true) => row.tp += 1,
                        (true, false) => row.fp += 1,
                        (false, true) => row.fn_ += 1,
                        (false, false) => row.tn += 1,
                    }
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}
