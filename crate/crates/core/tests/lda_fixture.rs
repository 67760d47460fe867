mod common;

use common::{mass_on_topic, separation_fixture};
use tweetpool::corpus::{Stopwords, Vocabulary};
use tweetpool::eval::retrieval::cosine;
use tweetpool::lda::{train, GibbsSampler, LdaConfig, TopicModel};
use tweetpool::pooling::{pool_author, pool_unpooled};

fn vocab_of(pooled: &tweetpool::PooledCorpus) -> Vocabulary {
    Vocabulary::from_token_lists(pooled.docs().iter().map(|d| d.tokens.as_slice()), 1)
}

#[test]
fn counts_are_conserved_after_every_sweep() {
    let corpus = separation_fixture(1);
    let tc = corpus.tokenize(&Stopwords::english());
    let pooled = pool_unpooled(&tc);
    let vocab = vocab_of(&pooled);
    let (k, v) = (3, vocab.len());
    let doc_lengths: Vec<usize> = pooled.docs().iter().map(|d| vocab.encode(&d.tokens).0.len()).collect();
    let tokens: usize = doc_lengths.iter().sum();

    let config = LdaConfig { iterations: 60, seed: 4, ..LdaConfig::new(k) };
    let mut sampler = GibbsSampler::new(&pooled, &vocab, config).unwrap();
    assert_eq!(sampler.token_count(), tokens);
    for _ in 0..60 {
        sampler.sweep();
        let tw = sampler.topic_word_counts();
        let dt = sampler.doc_topic_counts();
        for t in 0..k {
            let row: u64 = tw[t * v..(t + 1) * v].iter().map(|&c| c as u64).sum();
            assert_eq!(row, sampler.topic_totals()[t]);
        }
        assert_eq!(sampler.topic_totals().iter().sum::<u64>(), tokens as u64);
        for (d, &len) in doc_lengths.iter().enumerate() {
            let sum: u32 = dt[d * k..(d + 1) * k].iter().sum();
            assert_eq!(sum as usize, len);
        }
        assert!(sampler.counts_consistent());
    }
    assert_eq!(sampler.sweeps_done(), 60);
}

#[test]
fn topics_separate_disjoint_vocabularies() {
    let corpus = separation_fixture(2);
    let tc = corpus.tokenize(&Stopwords::english());
    let pooled = pool_author(&tc);
    let vocab = vocab_of(&pooled);
    let model = train(&pooled, &vocab, LdaConfig { iterations: 200, seed: 9, ..LdaConfig::new(2) }).unwrap();

    let owner: Vec<usize> = (0..2)
        .map(|row| if mass_on_topic(&model, row, 0) > 0.5 { 0 } else { 1 })
        .collect();
    assert_ne!(owner[0], owner[1], "each topic should claim a different vocabulary");
    for row in 0..2 {
        assert!(mass_on_topic(&model, row, owner[row]) >= 0.9);
        let top = model.top_words(row, 10).unwrap();
        let prefix = format!("t{}w", owner[row]);
        assert!(top.iter().all(|(w, _)| w.starts_with(&prefix)), "{top:?}");
        assert!(top.windows(2).all(|p| p[0].1 >= p[1].1));
    }
}

#[test]
fn inference_recovers_document_topics() {
    let corpus = separation_fixture(3);
    let tc = corpus.tokenize(&Stopwords::english());
    let pooled = pool_author(&tc);
    let vocab = vocab_of(&pooled);
    let config = LdaConfig { alpha: 0.1, iterations: 200, seed: 5, ..LdaConfig::new(2) };
    let model = train(&pooled, &vocab, config).unwrap();

    for (d, doc) in pooled.docs().iter().enumerate() {
        let inferred = model.infer(&doc.tokens, 30, d as u64);
        assert!((inferred.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(inferred.iter().cloned().fold(0.0, f64::max) >= 0.8, "doc {d}: {inferred:?}");
        assert!(cosine(&inferred, model.theta_row(d)) >= 0.9);
    }

    // A single planted-topic tweet lands on the topic owning its vocabulary.
    for t in 0..2 {
        let words: Vec<String> = (0..6).map(|j| format!("t{t}w{j}")).collect();
        let theta = model.infer(&words, 30, 0);
        let best = if theta[0] > theta[1] { 0 } else { 1 };
        assert!(mass_on_topic(&model, best, t) > 0.9);
        assert!(theta[best] >= 0.8);
    }
    assert_eq!(model.infer(&["unseen".to_owned()], 10, 0), vec![0.5, 0.5]);
}

/// Window means of a stationary chain jitter, so a window only counts as a
/// decrease when it falls more than three standard errors below the one
/// before it.
#[test]
fn log_likelihood_trend_is_non_decreasing_over_windows() {
    let corpus = separation_fixture(4);
    let tc = corpus.tokenize(&Stopwords::english());
    let pooled = pool_author(&tc);
    let vocab = vocab_of(&pooled);
    let config = LdaConfig { iterations: 200, seed: 1, ..LdaConfig::new(2) };
    let mut sampler = GibbsSampler::new(&pooled, &vocab, config).unwrap();
    let start = sampler.log_likelihood();
    let mut trace = Vec::new();
    for _ in 0..200 {
        sampler.sweep();
        trace.push(sampler.log_likelihood());
    }
    assert!(trace.iter().all(|&ll| ll.is_finite() && ll <= 0.0));

    let stats: Vec<(f64, f64)> = trace
        .chunks(20)
        .map(|c| {
            let mean = c.iter().sum::<f64>() / c.len() as f64;
            let var = c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (c.len() - 1) as f64;
            (mean, var / c.len() as f64)
        })
        .collect();
    let steady = stats
        .windows(2)
        .filter(|p| p[1].0 >= p[0].0 - 3.0 * (p[0].1 + p[1].1).sqrt())
        .count();
    assert!(steady as f64 >= 0.9 * (stats.len() - 1) as f64, "{steady} of {}", stats.len() - 1);
    assert!(stats.last().unwrap().0 > start);

    let model = sampler.into_model();
    let ll = model.log_likelihood(&pooled).unwrap();
    assert!((ll - trace[199]).abs() <= 1e-9 * ll.abs());
}

#[test]
fn single_topic_gives_unigram_phi() {
    let corpus = separation_fixture(6);
    let tc = corpus.tokenize(&Stopwords::english());
    let pooled = pool_author(&tc);
    let vocab = vocab_of(&pooled);
    let model = train(&pooled, &vocab, LdaConfig { iterations: 5, ..LdaConfig::new(1) }).unwrap();
    let total: u64 = vocab.counts().iter().sum();
    let beta = model.config().beta;
    let denom = total as f64 + vocab.len() as f64 * beta;
    for (w, &c) in vocab.counts().iter().enumerate() {
        assert!((model.phi(0, w) - (c as f64 + beta) / denom).abs() < 1e-12);
    }
    for d in 0..model.doc_count() {
        assert_eq!(model.theta_row(d), &[1.0]);
    }
}

#[test]
fn fixed_seed_gives_identical_counts() {
    let corpus = separation_fixture(7);
    let tc = corpus.tokenize(&Stopwords::english());
    let pooled = pool_unpooled(&tc);
    let vocab = vocab_of(&pooled);
    let config = LdaConfig { iterations: 25, seed: 77, ..LdaConfig::new(3) };
    let a = train(&pooled, &vocab, config).unwrap();
    let b = train(&pooled, &vocab, config).unwrap();
    assert_eq!(a.topic_word_counts(), b.topic_word_counts());
    assert_eq!(a.doc_topic_counts(), b.doc_topic_counts());
    assert_eq!(a.topic_totals(), b.topic_totals());
}

#[test]
fn rows_are_distributions_and_model_round_trips() {
    let corpus = separation_fixture(5);
    let tc = corpus.tokenize(&Stopwords::english());
    let pooled = pool_author(&tc);
    let vocab = vocab_of(&pooled);
    let model = train(&pooled, &vocab, LdaConfig { iterations: 30, seed: 2, ..LdaConfig::new(4) }).unwrap();
    for t in 0..4 {
        assert!((model.phi_row(t).iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
    for d in 0..model.doc_count() {
        assert!((model.theta_row(d).iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    model.save(&path).unwrap();
    let back = TopicModel::load(&path).unwrap();
    assert_eq!(back.to_json().unwrap(), model.to_json().unwrap());
    assert_eq!(back.phi_row(1), model.phi_row(1));
    assert!(TopicModel::from_json("{\"format\":\"other\"}").is_err());
}
