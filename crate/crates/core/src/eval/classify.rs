//! Gaussian naive Bayes over topic-distribution features, scored by
//! macro-averaged F1.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Per-dimension variance floor.
pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNaiveBayes {
    classes: Vec<String>,
    log_priors: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
}

impl GaussianNaiveBayes {
    /// Fits class priors and per-class, per-dimension means and (population)
    /// variances. Classes are kept in sorted order.
    pub fn fit<S: AsRef<str>>(features: &[Vec<f64>], labels: &[S]) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::EmptyInput("no training rows"));
        }
        if features.len() != labels.len() {
            return Err(Error::Mismatch(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        let dim = features[0].len();
        if features.iter().any(|f| f.len() != dim) {
            return Err(Error::Mismatch("feature rows differ in length".into()));
        }

        let mut rows: BTreeMap<&str, Vec<&[f64]>> = BTreeMap::new();
        for (f, l) in features.iter().zip(labels) {
            rows.entry(l.as_ref()).or_default().push(f);
        }
        let n = features.len() as f64;
        let mut model = GaussianNaiveBayes {
            classes: Vec::with_capacity(rows.len()),
            log_priors: Vec::with_capacity(rows.len()),
            means: Vec::with_capacity(rows.len()),
            variances: Vec::with_capacity(rows.len()),
        };
        for (class, members) in rows {
            let m = members.len() as f64;
            let mean: Vec<f64> = (0..dim)
                .map(|d| members.iter().map(|r| r[d]).sum::<f64>() / m)
                .collect();
            let var: Vec<f64> = (0..dim)
                .map(|d| {
                    let v = members.iter().map(|r| (r[d] - mean[d]).powi(2)).sum::<f64>() / m;
                    v.max(VARIANCE_FLOOR)
                })
                .collect();
            model.classes.push(class.to_owned());
            model.log_priors.push((m / n).ln());
            model.means.push(mean);
            model.variances.push(var);
        }
        Ok(model)
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    fn log_posterior(&self, class: usize, x: &[f64]) -> f64 {
        let ll: f64 = x
            .iter()
            .zip(&self.means[class])
            .zip(&self.variances[class])
            .map(|((&xi, &mu), &var)| {
                -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (xi - mu).powi(2) / (2.0 * var)
            })
            .sum();
        self.log_priors[class] + ll
    }

    /// Most probable class; the first class in sorted order wins ties.
    pub fn predict(&self, x: &[f64]) -> &str {
        let mut best = 0;
        let mut best_score = self.log_posterior(0, x);
        for c in 1..self.classes.len() {
            let s = self.log_posterior(c, x);
            if s > best_score {
                best = c;
                best_score = s;
            }
        }
        &self.classes[best]
    }
}

/// Macro-averaged F1 over `classes` (per-class F1 = 2TP / (2TP + FP + FN)).
pub fn macro_f1<S: AsRef<str>, P: AsRef<str>>(truth: &[S], predicted: &[P], classes: &[String]) -> f64 {
    if classes.is_empty() {
        return 0.0;
    }
    let total: f64 = classes
        .iter()
        .map(|class| {
            let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
            for (t, p) in truth.iter().zip(predicted) {
                let is_t = t.as_ref() == class;
                let is_p = p.as_ref() == class;
                match (is_t, is_p) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fn_ += 1,
                    (false, false) => {}
                }
            }
            let denom = 2 * tp + fp + fn_;
            if denom == 0 {
                0.0
            } else {
                2.0 * tp as f64 / denom as f64
            }
        })
        .sum();
    total / classes.len() as f64
}

/// Fits naive Bayes on the train rows, predicts the test rows and returns
/// macro F1. Averaged classes are those seen in training that occur among
/// the test labels or predictions; test labels never seen in training are
/// left out with a warning.
pub fn classification_f1_from_features<S: AsRef<str>, T: AsRef<str>>(
    train_features: &[Vec<f64>],
    train_labels: &[S],
    test_features: &[Vec<f64>],
    test_labels: &[T],
) -> Result<f64> {
    if test_features.is_empty() {
        return Err(Error::EmptyInput("no test rows"));
    }
    if test_features.len() != test_labels.len() {
        return Err(Error::Mismatch(format!(
            "{} test rows but {} labels",
            test_features.len(),
            test_labels.len()
        )));
    }
    let model = GaussianNaiveBayes::fit(train_features, train_labels)?;
    let predicted: Vec<&str> = test_features.iter().map(|x| model.predict(x)).collect();

    let known: BTreeSet<&str> = model.classes().iter().map(String::as_str).collect();
    let unseen: BTreeSet<&str> = test_labels
        .iter()
        .map(AsRef::as_ref)
        .filter(|l| !known.contains(l))
        .collect();
    if !unseen.is_empty() {
        log::warn!("labels absent from training excluded from macro F1: {unseen:?}");
    }
    let present: BTreeSet<&str> = test_labels
        .iter()
        .map(AsRef::as_ref)
        .chain(predicted.iter().copied())
        .collect();
    let classes: Vec<String> = model
        .classes()
        .iter()
        .filter(|c| present.contains(c.as_str()))
        .cloned()
        .collect();
    Ok(macro_f1(test_labels, &predicted, &classes))
}
