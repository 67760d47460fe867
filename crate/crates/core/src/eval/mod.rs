//! Evaluation of a topic model trained on pooled documents: purity and NMI
//! of per-tweet topic clusters, naive Bayes classification F1, top-k
//! retrieval F1, and the end-to-end benchmark.

pub mod bench;
pub mod classify;
pub mod metrics;
pub mod retrieval;

use rayon::prelude::*;

pub use bench::{run_benchmark, score_model, BenchConfig, EvalReport, ModelScores, SchemeEvaluation, SchemeRecord};
pub use classify::{classification_f1_from_features, macro_f1, GaussianNaiveBayes};
pub use metrics::{argmax, contingency, nmi, purity, ClusterAssignment, LabelAssignment};
pub use retrieval::{retrieval_scores, RetrievalScores};

use crate::corpus::TokenizedCorpus;
use crate::error::Result;
use crate::lda::TopicModel;
use crate::seed::derive;

/// FNV-1a, used to give each tweet a seed that depends only on its id.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Fold-in seed for one tweet.
pub fn tweet_seed(seed: u64, tweet_id: &str) -> u64 {
    derive(seed, fnv1a(tweet_id.as_bytes()))
}

/// Topic distribution of every tweet in `corpus`, in corpus order.
pub fn tweet_topics(model: &TopicModel, corpus: &TokenizedCorpus<'_>, sweeps: usize, seed: u64) -> Vec<Vec<f64>> {
    corpus
        .tweets()
        .par_iter()
        .zip(corpus.tokens.par_iter())
        .map(|(t, tokens)| model.infer(tokens, sweeps, tweet_seed(seed, &t.id)))
        .collect()
}

/// Assigns each tweet to its most probable topic.
pub fn assign_clusters(model: &TopicModel, corpus: &TokenizedCorpus<'_>, sweeps: usize, seed: u64) -> ClusterAssignment {
    clusters_from_topics(corpus, &tweet_topics(model, corpus, sweeps, seed))
}

pub fn clusters_from_topics(corpus: &TokenizedCorpus<'_>, topics: &[Vec<f64>]) -> ClusterAssignment {
    corpus
        .tweets()
        .iter()
        .zip(topics)
        .map(|(t, p)| (t.id.clone(), argmax(p)))
        .collect()
}

pub fn labels_of(corpus: &TokenizedCorpus<'_>) -> LabelAssignment {
    corpus
        .tweets()
        .iter()
        .map(|t| (t.id.clone(), t.query_label.clone()))
        .collect()
}

fn label_list<'a>(corpus: &'a TokenizedCorpus<'_>) -> Vec<&'a str> {
    corpus.tweets().iter().map(|t| t.query_label.as_str()).collect()
}

/// Naive Bayes on fold-in topic distributions of train tweets, scored on
/// test tweets.
pub fn classification_f1(
    model: &TopicModel,
    train: &TokenizedCorpus<'_>,
    test: &TokenizedCorpus<'_>,
    sweeps: usize,
    seed: u64,
) -> Result<f64> {
    let train_x = tweet_topics(model, train, sweeps, seed);
    let test_x = tweet_topics(model, test, sweeps, seed);
    classification_f1_from_features(&train_x, &label_list(train), &test_x, &label_list(test))
}

/// Retrieval F1 of test tweets against train tweets.
pub fn retrieval_f1(
    model: &TopicModel,
    train: &TokenizedCorpus<'_>,
    test: &TokenizedCorpus<'_>,
    k: usize,
    sweeps: usize,
    seed: u64,
) -> Result<f64> {
    let train_x = tweet_topics(model, train, sweeps, seed);
    let test_x = tweet_topics(model, test, sweeps, seed);
    Ok(retrieval_scores(&train_x, &label_list(train), &test_x, &label_list(test), k)?.f1)
}
