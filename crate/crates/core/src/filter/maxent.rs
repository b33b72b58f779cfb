use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{common_shape, FeatureKind, FeatureVector, Label, LabeledExample};
use crate::error::{Error, Result};

const LABELS: [Label; 2] = [Label::Yes, Label::No];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Gis,
    Iis,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Gis => "GIS",
            Method::Iis => "IIS",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "GIS" => Ok(Method::Gis),
            "IIS" => Ok(Method::Iis),
            _ => Err(format!("unknown scaling method `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub method: Method,
    pub max_iters: usize,
    /// Stop once one iteration improves the log-likelihood by less than this.
    pub ll_tolerance: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            method: Method::Gis,
            max_iters: 20_000,
            ll_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Training-set log-likelihood before the first update, then after each one.
    pub log_likelihood: Vec<f64>,
    pub converged: bool,
}

impl TrainReport {
    pub fn iterations(&self) -> usize {
        self.log_likelihood.len() - 1
    }

    pub fn final_log_likelihood(&self) -> f64 {
        *self.log_likelihood.last().expect("at least the initial value")
    }
}

/// Conditional maximum-entropy model over `(offset, value, label)` indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxEntModel {
    pub kind: FeatureKind,
    pub width: usize,
    pub method: Method,
    pub feature_index: BTreeMap<(i32, String, Label), usize>,
    pub weights: Vec<f64>,
    /// Largest number of active indicators on any training (example, label) pair.
    pub gis_constant: usize,
}

impl MaxEntModel {
    fn active(&self, vector: &FeatureVector, label: Label) -> Vec<usize> {
        vector
            .features()
            .into_iter()
            .filter_map(|(pos, value)| self.feature_index.get(&(pos, value.to_string(), label)).copied())
            .collect()
    }

    /// P(YES | vector); indicators never seen in training carry no weight.
    pub fn posterior_yes(&self, vector: &FeatureVector) -> f64 {
        let score = |l| self.active(vector, l).iter().map(|&f| self.weights[f]).sum::<f64>();
        distribution(score(Label::Yes), score(Label::No))[0]
    }

    /// Distinct `(offset, value)` pairs behind the indicators.
    pub fn feature_count(&self) -> usize {
        let mut pairs: Vec<_> = self.feature_index.keys().map(|(p, v, _)| (p, v)).collect();
        pairs.dedup();
        pairs.len()
    }
}

fn distribution(yes: f64, no: f64) -> [f64; 2] {
    let m = yes.max(no);
    let (a, b) = ((yes - m).exp(), (no - m).exp());
    [a / (a + b), b / (a + b)]
}

struct Problem {
    /// Active feature ids per example, indexed by label slot.
    active: Vec<[Vec<usize>; 2]>,
    gold: Vec<usize>,
    empirical: Vec<f64>,
}

impl Problem {
    /// Log-likelihood and model expected counts under `weights`.
    fn pass(&self, weights: &[f64]) -> (f64, Vec<[f64; 2]>) {
        let mut ll = 0.0;
        let mut probs = Vec::with_capacity(self.active.len());
        for (i, act) in self.active.iter().enumerate() {
            let s = |y: usize| act[y].iter().map(|&f| weights[f]).sum::<f64>();
            let p = distribution(s(0), s(1));
            ll += p[self.gold[i]].ln();
            probs.push(p);
        }
        (ll, probs)
    }

    fn expected(&self, probs: &[[f64; 2]], n_features: usize) -> Vec<f64> {
        let mut e = vec![0.0; n_features];
        for (act, p) in self.active.iter().zip(probs) {
            for y in 0..2 {
                for &f in &act[y] {
                    e[f] += p[y];
                }
            }
        }
        e
    }
}

fn build(examples: &[LabeledExample]) -> (BTreeMap<(i32, String, Label), usize>, Problem) {
    let mut index = BTreeMap::new();
    for e in examples {
        for (pos, value) in e.vector.features() {
            let next = index.len();
            index.entry((pos, value.to_string(), e.label)).or_insert(next);
        }
    }
    let mut empirical = vec![0.0; index.len()];
    let mut active = Vec::with_capacity(examples.len());
    for e in examples {
        let ids = |label: Label| -> Vec<usize> {
            e.vector
                .features()
                .into_iter()
                .filter_map(|(pos, value)| index.get(&(pos, value.to_string(), label)).copied())
                .collect()
        };
        let act = [ids(Label::Yes), ids(Label::No)];
        for &f in &act[e.label.slot()] {
            empirical[f] += 1.0;
        }
        active.push(act);
    }
    let gold = examples.iter().map(|e| e.label.slot()).collect();
    (
        index,
        Problem {
            active,
            gold,
            empirical,
        },
    )
}

/// Root of `sum_k a_k exp(delta * k) = target` for k >= 1, by Newton steps
/// kept inside a bisection bracket.
fn iis_delta(terms: &BTreeMap<usize, f64>, target: f64) -> f64 {
    let g = |d: f64| terms.iter().map(|(&k, &a)| a * (d * k as f64).exp()).sum::<f64>() - target;
    let dg = |d: f64| terms.iter().map(|(&k, &a)| a * k as f64 * (d * k as f64).exp()).sum::<f64>();
    let (mut lo, mut hi) = (-1.0, 1.0);
    while g(lo) > 0.0 {
        lo *= 2.0;
    }
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut d = 0.0;
    for _ in 0..200 {
        let v = g(d);
        if v == 0.0 {
            return d;
        }
        if v < 0.0 {
            lo = d;
        } else {
            hi = d;
        }
        let newton = d - v / dg(d);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - d).abs() < 1e-10 || hi - lo < 1e-10 {
            return next;
        }
        d = next;
    }
    d
}

pub fn train_maxent(examples: &[LabeledExample], opts: &TrainOptions) -> Result<(MaxEntModel, TrainReport)> {
    let (kind, width) = common_shape(examples)?;
    if opts.max_iters == 0 {
        return Err(Error::Config("max_iters must be at least 1".into()));
    }
    let (index, problem) = build(examples);
    let n = index.len();
    let c = problem
        .active
        .iter()
        .flat_map(|a| a.iter().map(Vec::len))
        .max()
        .unwrap_or(1)
        .max(1);
    let mut weights = vec![0.0; n];
    let (mut ll, mut probs) = problem.pass(&weights);
    if !ll.is_finite() {
        return Err(Error::NonFinite(0));
    }
    let mut history = vec![ll];
    let mut converged = false;
    for iter in 1..=opts.max_iters {
        match opts.method {
            Method::Gis => {
                let expected = problem.expected(&probs, n);
                for f in 0..n {
                    weights[f] += (problem.empirical[f] / expected[f]).ln() / c as f64;
                }
            }
            Method::Iis => {
                let mut terms: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
                for (act, p) in problem.active.iter().zip(&probs) {
                    for y in 0..2 {
                        let total = act[y].len();
                        for &f in &act[y] {
                            *terms[f].entry(total).or_insert(0.0) += p[y];
                        }
                    }
                }
                let deltas: Vec<f64> = (0..n).map(|f| iis_delta(&terms[f], problem.empirical[f])).collect();
                for (w, d) in weights.iter_mut().zip(deltas) {
                    *w += d;
                }
            }
        }
        let (next_ll, next_probs) = problem.pass(&weights);
        if !next_ll.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite(iter));
        }
        history.push(next_ll);
        let gain = next_ll - ll;
        ll = next_ll;
        probs = next_probs;
        if gain < opts.ll_tolerance {
            converged = true;
            break;
        }
    }
    let model = MaxEntModel {
        kind,
        width,
        method: opts.method,
        feature_index: index,
        weights,
        gis_constant: c,
    };
    Ok((
        model,
        TrainReport {
            log_likelihood: history,
            converged,
        },
    ))
}

/// Empirical and model-expected count of every indicator on `examples`,
/// in feature-id order.
pub fn feature_expectations(model: &MaxEntModel, examples: &[LabeledExample]) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0); model.weights.len()];
    for e in examples {
        let p = [model.posterior_yes(&e.vector), 1.0 - model.posterior_yes(&e.vector)];
        for label in LABELS {
            for f in model.active(&e.vector, label) {
                out[f].1 += p[label.slot()];
                if label == e.label {
                    out[f].0 += 1.0;
                }
            }
        }
    }
    out
}
