//! End-to-end benchmark: split, pool, train and score every scheme.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{clusters_from_topics, labels_of, nmi, purity, retrieval_scores, tweet_topics};
use super::classify::classification_f1_from_features;
use crate::corpus::{time_split, Corpus, Stopwords, Vocabulary};
use crate::error::{Error, Result};
use crate::lda::{train, LdaConfig, TopicModel};
use crate::pooling::{pool, CorpusStats, PooledCorpus, PoolingOptions, Scheme};
use crate::seed::{derive, stream};

/// Settings for one benchmark run. All randomness derives from `seed`:
/// Louvain, LDA training and fold-in inference each get their own stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub dataset: String,
    pub seed: u64,
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub split: f64,
    pub resolution: f64,
    pub infer_sweeps: usize,
    pub retrieval_k: usize,
    pub min_count: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let lda = LdaConfig::default();
        BenchConfig {
            dataset: "corpus".into(),
            seed: 0,
            topics: lda.topics,
            alpha: lda.alpha,
            beta: lda.beta,
            iterations: lda.iterations,
            split: 0.8,
            resolution: 1.0,
            infer_sweeps: 20,
            retrieval_k: 10,
            min_count: 1,
        }
    }
}

impl BenchConfig {
    pub fn lda_config(&self) -> LdaConfig {
        LdaConfig {
            topics: self.topics,
            alpha: self.alpha,
            beta: self.beta,
            iterations: self.iterations,
            seed: derive(self.seed, stream::LDA),
        }
    }

    pub fn pooling_options(&self) -> PoolingOptions {
        PoolingOptions {
            resolution: self.resolution,
            louvain_seed: derive(self.seed, stream::LOUVAIN),
        }
    }

    pub fn infer_seed(&self) -> u64 {
        derive(self.seed, stream::INFER)
    }

    pub fn validate(&self) -> Result<()> {
        self.lda_config().validate()?;
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::InvalidSplit(self.split));
        }
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "resolution must be positive, got {}",
                self.resolution
            )));
        }
        if self.retrieval_k == 0 {
            return Err(Error::InvalidK);
        }
        Ok(())
    }
}

/// One row of the report, mirroring the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRecord {
    pub scheme: Scheme,
    pub purity: f64,
    pub nmi: f64,
    pub classification_f1: f64,
    pub retrieval_f1: f64,
    pub running_time_s: f64,
    pub docs: usize,
    pub max_words: usize,
    pub mean_words: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeFailure {
    pub scheme: Scheme,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub seed: u64,
    pub schemes: Vec<SchemeRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<SchemeFailure>,
    pub config: BenchConfig,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// A copy with every timing field zeroed, for determinism checks.
    pub fn without_timing(&self) -> Self {
        let mut out = self.clone();
        for r in &mut out.schemes {
            r.running_time_s = 0.0;
        }
        out
    }

    pub fn record(&self, scheme: Scheme) -> Option<&SchemeRecord> {
        self.schemes.iter().find(|r| r.scheme == scheme)
    }
}

/// Everything measured for one scheme, including values the report omits.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeEvaluation {
    pub scheme: Scheme,
    pub stats: CorpusStats,
    pub purity: f64,
    pub nmi: f64,
    pub classification_f1: f64,
    pub retrieval_f1: f64,
    pub retrieval_precision: f64,
    pub retrieval_recall: f64,
    pub running_time_s: f64,
}

impl SchemeEvaluation {
    pub fn record(&self) -> SchemeRecord {
        SchemeRecord {
            scheme: self.scheme,
            purity: self.purity,
            nmi: self.nmi,
            classification_f1: self.classification_f1,
            retrieval_f1: self.retrieval_f1,
            running_time_s: self.running_time_s,
            docs: self.stats.docs,
            max_words: self.stats.max_words,
            mean_words: self.stats.mean_words_rounded(),
        }
    }
}

/// A corpus split by time and tokenized, shared by all schemes of a run.
pub struct PreparedSplit {
    pub train: Corpus,
    pub test: Corpus,
    pub stopwords: Stopwords,
}

impl PreparedSplit {
    pub fn new(corpus: &Corpus, stopwords: Stopwords, split: f64) -> Result<Self> {
        let (train, test) = time_split(corpus, split)?;
        Ok(PreparedSplit {
            train,
            test,
            stopwords,
        })
    }
}

/// Every metric of one trained model on a split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelScores {
    pub purity: f64,
    pub nmi: f64,
    pub classification_f1: f64,
    pub retrieval_f1: f64,
    pub retrieval_precision: f64,
    pub retrieval_recall: f64,
}

/// Scores `model` on `split`. Purity and NMI are taken over all tweets; the
/// classifier and retrieval tasks use train tweets as reference and test
/// tweets as queries.
pub fn score_model(split: &PreparedSplit, model: &TopicModel, config: &BenchConfig) -> Result<ModelScores> {
    let train_tc = split.train.tokenize(&split.stopwords);
    let test_tc = split.test.tokenize(&split.stopwords);
    let seed = config.infer_seed();
    let train_x = tweet_topics(model, &train_tc, config.infer_sweeps, seed);
    let test_x = tweet_topics(model, &test_tc, config.infer_sweeps, seed);
    let train_labels: Vec<&str> = train_tc.tweets().iter().map(|t| t.query_label.as_str()).collect();
    let test_labels: Vec<&str> = test_tc.tweets().iter().map(|t| t.query_label.as_str()).collect();

    let mut clusters = clusters_from_topics(&train_tc, &train_x);
    clusters.0.extend(clusters_from_topics(&test_tc, &test_x).0);
    let mut labels = labels_of(&train_tc);
    labels.0.extend(labels_of(&test_tc).0);

    let classification_f1 = classification_f1_from_features(&train_x, &train_labels, &test_x, &test_labels)?;
    let retrieval = retrieval_scores(&train_x, &train_labels, &test_x, &test_labels, config.retrieval_k)?;
    Ok(ModelScores {
        purity: purity(&clusters, &labels)?,
        nmi: nmi(&clusters, &labels)?,
        classification_f1,
        retrieval_f1: retrieval.f1,
        retrieval_precision: retrieval.precision,
        retrieval_recall: retrieval.recall,
    })
}

/// Pools the train split under `scheme` and trains LDA on it. Returns the
/// pooled corpus, the model and the wall time of the two steps together.
pub fn pool_and_train(split: &PreparedSplit, scheme: Scheme, config: &BenchConfig) -> Result<(PooledCorpus, TopicModel, f64)> {
    let train_tc = split.train.tokenize(&split.stopwords);
    let vocab = Vocabulary::from_token_lists(train_tc.tokens.iter().map(Vec::as_slice), config.min_count);
    let started = Instant::now();
    let pooled = pool(scheme, &train_tc, &config.pooling_options())?;
    let model = train(&pooled, &vocab, config.lda_config())?;
    Ok((pooled, model, started.elapsed().as_secs_f64()))
}

/// Pools and trains (timed together), then computes every metric.
pub fn evaluate_scheme(split: &PreparedSplit, scheme: Scheme, config: &BenchConfig) -> Result<SchemeEvaluation> {
    let (pooled, model, running_time_s) = pool_and_train(split, scheme, config)?;
    let scores = score_model(split, &model, config)?;
    Ok(SchemeEvaluation {
        scheme,
        stats: pooled.stats(),
        purity: scores.purity,
        nmi: scores.nmi,
        classification_f1: scores.classification_f1,
        retrieval_f1: scores.retrieval_f1,
        retrieval_precision: scores.retrieval_precision,
        retrieval_recall: scores.retrieval_recall,
        running_time_s,
    })
}

/// Runs every scheme in order. A failing scheme is recorded and the others
/// still run.
pub fn run_benchmark(
    corpus: &Corpus,
    schemes: &[Scheme],
    stopwords: Stopwords,
    config: &BenchConfig,
) -> Result<EvalReport> {
    config.validate()?;
    let split = PreparedSplit::new(corpus, stopwords, config.split)?;
    let mut report = EvalReport {
        dataset: config.dataset.clone(),
        seed: config.seed,
        schemes: Vec::new(),
        failures: Vec::new(),
        config: config.clone(),
    };
    for &scheme in schemes {
        match evaluate_scheme(&split, scheme, config) {
            Ok(eval) => report.schemes.push(eval.record()),
            Err(e) => {
                log::error!("scheme {scheme} failed: {e}");
                report.failures.push(SchemeFailure {
                    scheme,
                    error: e.to_string(),
                });
            }
        }
    }
    Ok(report)
}
