//! Latent Dirichlet Allocation trained by collapsed Gibbs sampling, with
//! fold-in inference for individual tweets.
//!
//! Counts are kept in flat row-major tables: topic-word is `K x V`,
//! document-topic is `D x K`. The smoothed estimates are
//! `phi[k][w] = (n_kw + beta) / (n_k + V beta)` and
//! `theta[d][k] = (n_dk + alpha) / (n_d + K alpha)`.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::pooling::PooledCorpus;

/// Fold-in sweeps discarded before averaging.
pub const BURN_IN_SWEEPS: usize = 20;

const MODEL_FORMAT: &str = "tweetpool-lda";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl LdaConfig {
    /// `alpha = 50 / K`, `beta = 0.01`, 1000 sweeps.
    pub fn new(topics: usize) -> Self {
        LdaConfig {
            topics,
            alpha: 50.0 / topics.max(1) as f64,
            beta: 0.01,
            iterations: 1000,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.topics == 0 {
            return Err(Error::InvalidConfig("topic count must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig(format!("beta must be positive, got {}", self.beta)));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self::new(10)
    }
}

/// Draws an index from unnormalized cumulative weights.
fn draw(cumulative: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total = *cumulative.last().expect("at least one topic");
    let u = rng.gen::<f64>() * total;
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

/// Per-sweep caches for the bucketed conditional.
///
/// The collapsed conditional `(n_dk + a)(n_kw + b) / (n_k + V b)` splits into
/// a smoothing bucket `a b / (n_k + V b)`, a document bucket
/// `n_dk b / (n_k + V b)` over the topics present in the document, and a word
/// bucket `(n_dk + a) n_kw / (n_k + V b)` over the topics the word is
/// assigned to. Only the word bucket is evaluated per token; the other two
/// masses are kept up to date incrementally, so a token costs time in
/// proportion to how many topics its word and document actually use.
struct SweepCache {
    denom: Vec<f64>,
    coef: Vec<f64>,
    smoothing_mass: f64,
    doc_mass: f64,
    scratch: Vec<f64>,
}

/// Collapsed Gibbs sampler state. [`train`] drives it to completion; tests
/// and diagnostics can step it one sweep at a time.
#[derive(Debug, Clone)]
pub struct GibbsSampler {
    config: LdaConfig,
    vocab: Vocabulary,
    docs: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    topic_word: Vec<u32>,
    doc_topic: Vec<u32>,
    topic_total: Vec<u64>,
    // Topics with a nonzero count, per word and per document.
    word_topics: Vec<Vec<usize>>,
    doc_topics: Vec<Vec<usize>>,
    rng: ChaCha8Rng,
    dropped_tokens: usize,
    sweeps: usize,
}

fn remove_topic(list: &mut Vec<usize>, topic: usize) {
    if let Some(pos) = list.iter().position(|&t| t == topic) {
        list.swap_remove(pos);
    }
}

impl GibbsSampler {
    /// Encodes documents against `vocab` (out-of-vocabulary tokens are
    /// dropped and counted) and assigns every token a uniformly random topic.
    pub fn new(pooled: &PooledCorpus, vocab: &Vocabulary, config: LdaConfig) -> Result<Self> {
        config.validate()?;
        let k = config.topics;
        let v = vocab.len();
        let mut dropped_tokens = 0;
        let docs: Vec<Vec<usize>> = pooled
            .docs()
            .iter()
            .map(|d| {
                let (ids, dropped) = vocab.encode(&d.tokens);
                dropped_tokens += dropped;
                ids
            })
            .collect();
        if docs.iter().all(Vec::is_empty) {
            return Err(Error::NoTokens);
        }
        if dropped_tokens > 0 {
            log::info!("dropped {dropped_tokens} out-of-vocabulary tokens");
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut topic_word = vec![0u32; k * v];
        let mut doc_topic = vec![0u32; docs.len() * k];
        let mut topic_total = vec![0u64; k];
        let mut word_topics = vec![Vec::new(); v];
        let mut doc_topics = vec![Vec::new(); docs.len()];
        let assignments = docs
            .iter()
            .enumerate()
            .map(|(d, words)| {
                words
                    .iter()
                    .map(|&w| {
                        let z = rng.gen_range(0..k);
                        topic_word[z * v + w] += 1;
                        if topic_word[z * v + w] == 1 {
                            word_topics[w].push(z);
                        }
                        doc_topic[d * k + z] += 1;
                        if doc_topic[d * k + z] == 1 {
                            doc_topics[d].push(z);
                        }
                        topic_total[z] += 1;
                        z
                    })
                    .collect()
            })
            .collect();

        Ok(GibbsSampler {
            config,
            vocab: vocab.clone(),
            docs,
            assignments,
            topic_word,
            doc_topic,
            topic_total,
            word_topics,
            doc_topics,
            rng,
            dropped_tokens,
            sweeps: 0,
        })
    }

    fn new_cache(&self) -> SweepCache {
        let k = self.config.topics;
        let v_beta = self.vocab.len() as f64 * self.config.beta;
        let denom: Vec<f64> = self.topic_total.iter().map(|&n| n as f64 + v_beta).collect();
        let coef = denom.iter().map(|d| self.config.alpha / d).collect();
        SweepCache {
            denom,
            coef,
            smoothing_mass: 0.0,
            doc_mass: 0.0,
            scratch: vec![0.0; k],
        }
    }

    /// Loads document `d` into the cache: recomputes both incremental masses
    /// and the coefficients of the document's topics.
    fn enter_doc(&self, d: usize, cache: &mut SweepCache) {
        let k = self.config.topics;
        let (alpha, beta) = (self.config.alpha, self.config.beta);
        cache.smoothing_mass = cache.denom.iter().map(|den| alpha * beta / den).sum();
        cache.doc_mass = 0.0;
        for &t in &self.doc_topics[d] {
            let n = self.doc_topic[d * k + t] as f64;
            cache.doc_mass += n * beta / cache.denom[t];
            cache.coef[t] = (n + alpha) / cache.denom[t];
        }
    }

    fn leave_doc(&self, d: usize, cache: &mut SweepCache) {
        for &t in &self.doc_topics[d] {
            cache.coef[t] = self.config.alpha / cache.denom[t];
        }
    }

    /// Adds `delta` (+1 or -1) to the counts of `topic` for word `w` in
    /// document `d`, keeping the cache and sparsity lists in step.
    fn shift(&mut self, d: usize, w: usize, topic: usize, delta: i32, cache: &mut SweepCache) {
        let k = self.config.topics;
        let v = self.vocab.len();
        let (alpha, beta) = (self.config.alpha, self.config.beta);
        let dt = d * k + topic;
        let tw = topic * v + w;

        cache.smoothing_mass -= alpha * beta / cache.denom[topic];
        cache.doc_mass -= self.doc_topic[dt] as f64 * beta / cache.denom[topic];

        if delta > 0 {
            self.doc_topic[dt] += 1;
            self.topic_word[tw] += 1;
            self.topic_total[topic] += 1;
            if self.doc_topic[dt] == 1 {
                self.doc_topics[d].push(topic);
            }
            if self.topic_word[tw] == 1 {
                self.word_topics[w].push(topic);
            }
        } else {
            self.doc_topic[dt] -= 1;
            self.topic_word[tw] -= 1;
            self.topic_total[topic] -= 1;
            if self.doc_topic[dt] == 0 {
                remove_topic(&mut self.doc_topics[d], topic);
            }
            if self.topic_word[tw] == 0 {
                remove_topic(&mut self.word_topics[w], topic);
            }
        }

        let n_dt = self.doc_topic[dt] as f64;
        cache.denom[topic] = self.topic_total[topic] as f64 + v as f64 * beta;
        cache.smoothing_mass += alpha * beta / cache.denom[topic];
        cache.doc_mass += n_dt * beta / cache.denom[topic];
        cache.coef[topic] = (n_dt + alpha) / cache.denom[topic];
    }

    /// Draws a topic for word `w` in document `d` (with the token's own
    /// assignment already removed), mapping `u` in `[0, 1)` through the
    /// bucketed cumulative distribution.
    fn choose(&self, d: usize, w: usize, u: f64, cache: &mut SweepCache) -> usize {
        let k = self.config.topics;
        let v = self.vocab.len();
        let (alpha, beta) = (self.config.alpha, self.config.beta);

        let word_list = &self.word_topics[w];
        let mut word_mass = 0.0;
        for (j, &t) in word_list.iter().enumerate() {
            let m = cache.coef[t] * self.topic_word[t * v + w] as f64;
            cache.scratch[j] = m;
            word_mass += m;
        }
        let doc_mass = cache.doc_mass.max(0.0);
        let mut u = u * (word_mass + doc_mass + cache.smoothing_mass);

        if u < word_mass {
            for (j, &t) in word_list.iter().enumerate() {
                u -= cache.scratch[j];
                if u < 0.0 {
                    return t;
                }
            }
            return *word_list.last().expect("nonempty word bucket");
        }
        u -= word_mass;

        let doc_list = &self.doc_topics[d];
        if u < doc_mass && !doc_list.is_empty() {
            for &t in doc_list {
                u -= self.doc_topic[d * k + t] as f64 * beta / cache.denom[t];
                if u < 0.0 {
                    return t;
                }
            }
            return *doc_list.last().expect("nonempty doc bucket");
        }
        u -= doc_mass;

        for t in 0..k {
            u -= alpha * beta / cache.denom[t];
            if u < 0.0 {
                return t;
            }
        }
        k - 1
    }

    /// Resamples every token's topic once.
    pub fn sweep(&mut self) {
        let mut cache = self.new_cache();
        for d in 0..self.docs.len() {
            self.enter_doc(d, &mut cache);
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.assignments[d][i];
                self.shift(d, w, old, -1, &mut cache);
                let u = self.rng.gen::<f64>();
                let new = self.choose(d, w, u, &mut cache);
                self.shift(d, w, new, 1, &mut cache);
                self.assignments[d][i] = new;
            }
            self.leave_doc(d, &mut cache);
        }
        self.sweeps += 1;
    }

    pub fn sweeps_done(&self) -> usize {
        self.sweeps
    }

    /// In-vocabulary tokens across all documents.
    pub fn token_count(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    pub fn dropped_tokens(&self) -> usize {
        self.dropped_tokens
    }

    pub fn topic_word_counts(&self) -> &[u32] {
        &self.topic_word
    }

    pub fn doc_topic_counts(&self) -> &[u32] {
        &self.doc_topic
    }

    pub fn topic_totals(&self) -> &[u64] {
        &self.topic_total
    }

    /// Checks that the three count tables agree with each other and with the
    /// token assignments.
    pub fn counts_consistent(&self) -> bool {
        let k = self.config.topics;
        let v = self.vocab.len();
        let tokens = self.token_count() as u64;
        let tw_sum: u64 = self.topic_word.iter().map(|&c| c as u64).sum();
        let dt_sum: u64 = self.doc_topic.iter().map(|&c| c as u64).sum();
        let totals_match = (0..k).all(|t| {
            let row: u64 = self.topic_word[t * v..(t + 1) * v].iter().map(|&c| c as u64).sum();
            row == self.topic_total[t]
        });
        let docs_match = self
            .assignments
            .iter()
            .enumerate()
            .all(|(d, z)| self.doc_topic[d * k..(d + 1) * k].iter().map(|&c| c as usize).sum::<usize>() == z.len());
        let lists_match = (0..v).all(|w| {
            let mut listed = self.word_topics[w].clone();
            listed.sort_unstable();
            listed == (0..k).filter(|&t| self.topic_word[t * v + w] > 0).collect::<Vec<_>>()
        }) && (0..self.docs.len()).all(|d| {
            let mut listed = self.doc_topics[d].clone();
            listed.sort_unstable();
            listed == (0..k).filter(|&t| self.doc_topic[d * k + t] > 0).collect::<Vec<_>>()
        });
        tw_sum == tokens && dt_sum == tokens && totals_match && docs_match && lists_match
    }

    /// Token log-likelihood of the training documents under the current
    /// smoothed estimates.
    pub fn log_likelihood(&self) -> f64 {
        let model = self.snapshot();
        self.docs
            .iter()
            .enumerate()
            .map(|(d, words)| model.doc_log_likelihood(d, words))
            .sum()
    }

    fn snapshot(&self) -> TopicModel {
        TopicModel::from_counts(
            self.config,
            self.vocab.clone(),
            self.topic_word.clone(),
            self.doc_topic.clone(),
            self.topic_total.clone(),
        )
    }

    pub fn into_model(self) -> TopicModel {
        let mut model = TopicModel::from_counts(
            self.config,
            self.vocab,
            self.topic_word,
            self.doc_topic,
            self.topic_total,
        );
        model.dropped_tokens = self.dropped_tokens;
        model
    }
}

/// Trains LDA on pooled documents for `config.iterations` sweeps.
pub fn train(pooled: &PooledCorpus, vocab: &Vocabulary, config: LdaConfig) -> Result<TopicModel> {
    let mut sampler = GibbsSampler::new(pooled, vocab, config)?;
    for _ in 0..config.iterations {
        sampler.sweep();
    }
    Ok(sampler.into_model())
}

/// A fitted topic model: count tables plus the smoothed `phi` and `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    config: LdaConfig,
    vocab: Vocabulary,
    topic_word: Vec<u32>,
    doc_topic: Vec<u32>,
    topic_total: Vec<u64>,
    phi: Vec<f64>,
    theta: Vec<f64>,
    dropped_tokens: usize,
}

impl TopicModel {
    fn from_counts(
        config: LdaConfig,
        vocab: Vocabulary,
        topic_word: Vec<u32>,
        doc_topic: Vec<u32>,
        topic_total: Vec<u64>,
    ) -> Self {
        let k = config.topics;
        let v = vocab.len();
        let d = if k == 0 { 0 } else { doc_topic.len() / k };
        let v_beta = v as f64 * config.beta;
        let mut phi = vec![0.0; k * v];
        for t in 0..k {
            let denom = topic_total[t] as f64 + v_beta;
            for w in 0..v {
                phi[t * v + w] = (topic_word[t * v + w] as f64 + config.beta) / denom;
            }
        }
        let k_alpha = k as f64 * config.alpha;
        let mut theta = vec![0.0; d * k];
        for doc in 0..d {
            let row = &doc_topic[doc * k..(doc + 1) * k];
            let len: u64 = row.iter().map(|&c| c as u64).sum();
            let denom = len as f64 + k_alpha;
            for t in 0..k {
                theta[doc * k + t] = (row[t] as f64 + config.alpha) / denom;
            }
        }
        TopicModel {
            config,
            vocab,
            topic_word,
            doc_topic,
            topic_total,
            phi,
            theta,
            dropped_tokens: 0,
        }
    }

    pub fn config(&self) -> &LdaConfig {
        &self.config
    }

    pub fn topics(&self) -> usize {
        self.config.topics
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn doc_count(&self) -> usize {
        self.theta.len() / self.config.topics
    }

    pub fn phi_row(&self, topic: usize) -> &[f64] {
        let v = self.vocab.len();
        &self.phi[topic * v..(topic + 1) * v]
    }

    pub fn phi(&self, topic: usize, word: usize) -> f64 {
        self.phi[topic * self.vocab.len() + word]
    }

    pub fn theta_row(&self, doc: usize) -> &[f64] {
        let k = self.config.topics;
        &self.theta[doc * k..(doc + 1) * k]
    }

    pub fn topic_word_counts(&self) -> &[u32] {
        &self.topic_word
    }

    pub fn doc_topic_counts(&self) -> &[u32] {
        &self.doc_topic
    }

    pub fn topic_totals(&self) -> &[u64] {
        &self.topic_total
    }

    pub fn dropped_tokens(&self) -> usize {
        self.dropped_tokens
    }

    fn doc_log_likelihood(&self, doc: usize, words: &[usize]) -> f64 {
        let theta = self.theta_row(doc);
        words
            .iter()
            .map(|&w| {
                let p: f64 = theta
                    .iter()
                    .enumerate()
                    .map(|(t, &th)| th * self.phi(t, w))
                    .sum();
                p.ln()
            })
            .sum()
    }

    /// `sum_d sum_{w in d} ln sum_k theta[d][k] phi[k][w]` over in-vocabulary
    /// tokens. `pooled` must be the corpus the model was trained on.
    pub fn log_likelihood(&self, pooled: &PooledCorpus) -> Result<f64> {
        if pooled.len() != self.doc_count() {
            return Err(Error::Mismatch(format!(
                "model has {} documents, pooled corpus has {}",
                self.doc_count(),
                pooled.len()
            )));
        }
        Ok(pooled
            .docs()
            .iter()
            .enumerate()
            .map(|(d, doc)| self.doc_log_likelihood(d, &self.vocab.encode(&doc.tokens).0))
            .sum())
    }

    /// Topic distribution of a new token list by fold-in Gibbs sampling with
    /// `phi` fixed: [`BURN_IN_SWEEPS`] discarded sweeps, then the theta
    /// estimate averaged over `sweeps` further sweeps (at least one). A list
    /// with no in-vocabulary token gets the uniform distribution.
    pub fn infer(&self, tokens: &[String], sweeps: usize, seed: u64) -> Vec<f64> {
        let k = self.config.topics;
        let (words, _) = self.vocab.encode(tokens);
        if words.is_empty() {
            return vec![1.0 / k as f64; k];
        }
        let alpha = self.config.alpha;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0u32; k];
        let mut z: Vec<usize> = words
            .iter()
            .map(|_| {
                let t = rng.gen_range(0..k);
                counts[t] += 1;
                t
            })
            .collect();

        let sweeps = sweeps.max(1);
        let denom = words.len() as f64 + k as f64 * alpha;
        let mut cumulative = vec![0.0; k];
        let mut average = vec![0.0; k];
        for sweep in 0..BURN_IN_SWEEPS + sweeps {
            for (i, &w) in words.iter().enumerate() {
                counts[z[i]] -= 1;
                let mut acc = 0.0;
                for (t, slot) in cumulative.iter_mut().enumerate() {
                    acc += (counts[t] as f64 + alpha) * self.phi(t, w);
                    *slot = acc;
                }
                z[i] = draw(&cumulative, &mut rng);
                counts[z[i]] += 1;
            }
            if sweep >= BURN_IN_SWEEPS {
                for (a, &c) in average.iter_mut().zip(&counts) {
                    *a += (c as f64 + alpha) / denom;
                }
            }
        }
        let total: f64 = average.iter().sum();
        average.iter_mut().for_each(|a| *a /= total);
        average
    }

    /// The `n` most probable tokens of `topic`, ties broken by token index.
    pub fn top_words(&self, topic: usize, n: usize) -> Result<Vec<(String, f64)>> {
        if topic >= self.topics() {
            return Err(Error::TopicOutOfRange {
                topic,
                topics: self.topics(),
            });
        }
        let row = self.phi_row(topic);
        let mut idx: Vec<usize> = (0..row.len()).collect();
        idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        Ok(idx
            .into_iter()
            .take(n)
            .map(|w| (self.vocab.token(w).unwrap_or_default().to_owned(), row[w]))
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        let k = self.topics();
        let v = self.vocab.len();
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            config: self.config,
            vocabulary: VocabFile {
                tokens: self.vocab.tokens().to_vec(),
                counts: self.vocab.counts().to_vec(),
            },
            topic_word: self.topic_word.chunks(v.max(1)).take(k).map(<[u32]>::to_vec).collect(),
            doc_topic: self.doc_topic.chunks(k).map(<[u32]>::to_vec).collect(),
            topic_totals: self.topic_total.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT {
            return Err(Error::ModelFormat(format!("unexpected format tag {:?}", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!("unsupported version {}", file.version)));
        }
        file.config.validate()?;
        let k = file.config.topics;
        let vocab = Vocabulary::from_parts(file.vocabulary.tokens, file.vocabulary.counts)?;
        let v = vocab.len();
        if file.topic_word.len() != k || file.topic_word.iter().any(|r| r.len() != v) {
            return Err(Error::ModelFormat(format!("topic_word must be {k} x {v}")));
        }
        if file.doc_topic.iter().any(|r| r.len() != k) {
            return Err(Error::ModelFormat(format!("doc_topic rows must have {k} entries")));
        }
        if file.topic_totals.len() != k {
            return Err(Error::ModelFormat(format!("topic_totals must have {k} entries")));
        }
        for (t, row) in file.topic_word.iter().enumerate() {
            if row.iter().map(|&c| c as u64).sum::<u64>() != file.topic_totals[t] {
                return Err(Error::ModelFormat(format!("topic {t} total disagrees with its row")));
            }
        }
        Ok(TopicModel::from_counts(
            file.config,
            vocab,
            file.topic_word.concat(),
            file.doc_topic.concat(),
            file.topic_totals,
        ))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    tokens: Vec<String>,
    counts: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    config: LdaConfig,
    vocabulary: VocabFile,
    topic_word: Vec<Vec<u32>>,
    doc_topic: Vec<Vec<u32>>,
    topic_totals: Vec<u64>,
}

/// Free-function form of [`TopicModel::infer`].
pub fn infer_tweet_topics(model: &TopicModel, tokens: &[String], sweeps: usize, seed: u64) -> Vec<f64> {
    model.infer(tokens, sweeps, seed)
}

/// Free-function form of [`TopicModel::top_words`].
pub fn top_words(model: &TopicModel, topic: usize, n: usize) -> Result<Vec<(String, f64)>> {
    model.top_words(topic, n)
}
