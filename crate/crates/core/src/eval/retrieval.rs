//! Top-k retrieval of training tweets by cosine similarity of topic
//! distributions.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Test-tweet averages of per-tweet precision@k, recall@k and F1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrievalScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Indices of the `k` training rows most similar to `query`, best first.
/// Equal similarities keep training order, which is time order.
pub fn top_k(query: &[f64], train: &[Vec<f64>], k: usize) -> Vec<usize> {
    let mut scored: Vec<(f64, usize)> = train.iter().enumerate().map(|(i, t)| (cosine(query, t), i)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.into_iter().take(k).map(|(_, i)| i).collect()
}

/// For each test tweet retrieves the top `k` training tweets; a retrieved
/// tweet is relevant when it shares the test tweet's label. Recall is taken
/// against every same-label training tweet. Per-tweet scores are averaged
/// over test tweets. With fewer than `k` training tweets all are retrieved.
pub fn retrieval_scores<S: AsRef<str> + Sync, T: AsRef<str> + Sync>(
    train_features: &[Vec<f64>],
    train_labels: &[S],
    test_features: &[Vec<f64>],
    test_labels: &[T],
    k: usize,
) -> Result<RetrievalScores> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    if test_features.is_empty() {
        return Err(Error::EmptyInput("no test rows"));
    }
    if train_features.len() != train_labels.len() || test_features.len() != test_labels.len() {
        return Err(Error::Mismatch("feature and label counts differ".into()));
    }
    let per_tweet: Vec<(f64, f64, f64)> = test_features
        .par_iter()
        .zip(test_labels.par_iter())
        .map(|(query, label)| {
            let label = label.as_ref();
            let relevant = train_labels.iter().filter(|l| l.as_ref() == label).count();
            let retrieved = top_k(query, train_features, k);
            if relevant == 0 || retrieved.is_empty() {
                return (0.0, 0.0, 0.0);
            }
            let hits = retrieved.iter().filter(|&&i| train_labels[i].as_ref() == label).count();
            let precision = hits as f64 / retrieved.len() as f64;
            let recall = hits as f64 / relevant as f64;
            let f1 = if hits == 0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            (precision, recall, f1)
        })
        .collect();
    let n = per_tweet.len() as f64;
    let (p, r, f) = per_tweet
        .iter()
        .fold((0.0, 0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1, acc.2 + x.2));
    Ok(RetrievalScores {
        precision: p / n,
        recall: r / n,
        f1: f / n,
    })
}
