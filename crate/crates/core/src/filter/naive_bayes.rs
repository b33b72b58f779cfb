use std::collections::BTreeMap;

use super::{common_shape, FeatureKind, FeatureVector, Label, LabeledExample};
use crate::error::Result;

/// Position-aware naive Bayes kept as raw counts; probabilities are derived
/// on demand with add-α smoothing over the observed values plus one
/// UNSEEN bucket per position.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    pub kind: FeatureKind,
    pub width: usize,
    pub alpha: f64,
    /// Examples per label, indexed YES then NO.
    pub class_counts: [u64; 2],
    /// `(offset, value)` to per-label counts.
    pub counts: BTreeMap<(i32, String), [u64; 2]>,
    vocab: BTreeMap<i32, usize>,
}

impl NaiveBayesModel {
    pub fn from_counts(
        kind: FeatureKind,
        width: usize,
        alpha: f64,
        class_counts: [u64; 2],
        counts: BTreeMap<(i32, String), [u64; 2]>,
    ) -> Self {
        let mut vocab = BTreeMap::new();
        for (pos, _) in counts.keys() {
            *vocab.entry(*pos).or_insert(0) += 1;
        }
        NaiveBayesModel {
            kind,
            width,
            alpha,
            class_counts,
            counts,
            vocab,
        }
    }

    pub fn prior(&self, label: Label) -> f64 {
        self.class_counts[label.slot()] as f64 / self.class_counts.iter().sum::<u64>() as f64
    }

    /// Number of distinct values seen at `pos`.
    pub fn vocabulary(&self, pos: i32) -> usize {
        self.vocab.get(&pos).copied().unwrap_or(0)
    }

    /// Smoothed P(value | label, pos); unseen values get the UNSEEN mass.
    pub fn likelihood(&self, label: Label, pos: i32, value: &str) -> f64 {
        let c = self
            .counts
            .get(&(pos, value.to_string()))
            .map_or(0, |c| c[label.slot()]);
        let n = self.class_counts[label.slot()] as f64;
        let v = self.vocabulary(pos) as f64;
        (c as f64 + self.alpha) / (n + self.alpha * (v + 1.0))
    }

    /// P(YES | vector). When every class has zero likelihood the priors decide.
    pub fn posterior_yes(&self, vector: &FeatureVector) -> f64 {
        let log_score = |label: Label| {
            let mut s = self.prior(label).ln();
            for (pos, value) in vector.features() {
                s += self.likelihood(label, pos, value).ln();
            }
            s
        };
        let (yes, no) = (log_score(Label::Yes), log_score(Label::No));
        match (yes.is_finite(), no.is_finite()) {
            (true, true) => {
                let m = yes.max(no);
                let (a, b) = ((yes - m).exp(), (no - m).exp());
                a / (a + b)
            }
            (true, false) => 1.0,
            (false, true) => 0.0,
            (false, false) => self.prior(Label::Yes),
        }
    }

    /// Distinct `(offset, value)` pairs seen in training.
    pub fn feature_count(&self) -> usize {
        self.counts.len()
    }
}

pub fn train_nb(examples: &[LabeledExample], alpha: f64) -> Result<NaiveBayesModel> {
    let (kind, width) = common_shape(examples)?;
    let mut class_counts = [0u64; 2];
    let mut counts: BTreeMap<(i32, String), [u64; 2]> = BTreeMap::new();
    for e in examples {
        let slot = e.label.slot();
        class_counts[slot] += 1;
        for (pos, value) in e.vector.features() {
            counts.entry((pos, value.to_string())).or_insert([0, 0])[slot] += 1;
        }
    }
    Ok(NaiveBayesModel::from_counts(kind, width, alpha, class_counts, counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::parse_examples;

    fn data(lines: &str) -> Vec<LabeledExample> {
        parse_examples(lines).unwrap()
    }

    #[test]
    fn two_example_hand_arithmetic() {
        let ex = data("YES\tWORD\t1\ta\tm\tb\nNO\tWORD\t1\tc\tn\td");
        let m = train_nb(&ex, 1.0).unwrap();
        // each position holds 2 values, so denominators are 1 + 1*(2+1) = 4
        assert_eq!(m.likelihood(Label::Yes, -1, "a"), 0.5);
        assert_eq!(m.likelihood(Label::Yes, -1, "c"), 0.25);
        assert_eq!(m.likelihood(Label::Yes, -1, "zzz"), 0.25);
        // YES: 0.5 * 0.5^3, NO: 0.5 * 0.25^3
        let expected = 0.125 / (0.125 + 0.015625);
        assert!((m.posterior_yes(&ex[0].vector) - expected).abs() < 1e-12);
    }

    #[test]
    fn duplicated_data_same_probabilities() {
        let ex = data("YES\tWORD\t1\ta\tm\tb\nNO\tWORD\t1\tc\tm\tb\nYES\tWORD\t1\ta\tn\td");
        let doubled: Vec<_> = ex.iter().chain(&ex).cloned().collect();
        let (m1, m2) = (train_nb(&ex, 0.0).unwrap(), train_nb(&doubled, 0.0).unwrap());
        for e in &ex {
            assert!((m1.posterior_yes(&e.vector) - m2.posterior_yes(&e.vector)).abs() < 1e-12);
        }
        assert_eq!(m1.prior(Label::Yes), m2.prior(Label::Yes));
    }

    #[test]
    fn zero_alpha_unseen_falls_back_to_prior() {
        let ex = data("YES\tWORD\t1\ta\tm\tb\nYES\tWORD\t1\ta\tm\tb\nNO\tWORD\t1\tc\tm\td");
        let m = train_nb(&ex, 0.0).unwrap();
        let probe = data("NO\tWORD\t1\tnever\tm\tseen").remove(0).vector;
        assert!((m.posterior_yes(&probe) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_label_rejected() {
        assert!(train_nb(&data("YES\tWORD\t1\ta\tm\tb"), 1.0).is_err());
    }
}
