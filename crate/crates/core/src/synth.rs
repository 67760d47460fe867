//! Synthetic labeled tweet corpora with planted communities and topics.
//!
//! Users are split into communities. Community `c` is assigned topics
//! `c, c+1, ...` (mod the topic count) and draws a fixed mixture over them
//! from a flat Dirichlet. Each original tweet samples a topic from its
//! author's mixture and then words uniformly from that topic's vocabulary;
//! topic vocabularies are disjoint. Retweets connect users inside a
//! community with probability `p_retweet_in` per ordered pair and across
//! communities with `p_retweet_out`. Every tweet is labeled with the name of
//! its planted topic.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::community::Partition;
use crate::corpus::{Corpus, Tweet};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

const BASE_TIMESTAMP: i64 = 1_600_000_000;
const HASHTAGS_PER_TOPIC: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub communities: usize,
    pub users_per_community: usize,
    pub topics: usize,
    pub topics_per_community: usize,
    pub vocab_per_topic: usize,
    pub tweets_per_user: usize,
    pub tweet_length: usize,
    pub p_retweet_in: f64,
    pub p_retweet_out: f64,
    pub hashtag_rate: f64,
    pub reply_rate: f64,
    pub mention_rate: f64,
    /// Probability that a word is drawn from a background vocabulary shared
    /// by all topics instead of the tweet's own topic.
    pub noise_rate: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            communities: 4,
            users_per_community: 25,
            topics: 4,
            topics_per_community: 2,
            vocab_per_topic: 120,
            tweets_per_user: 4,
            tweet_length: 4,
            p_retweet_in: 0.3,
            p_retweet_out: 0.01,
            hashtag_rate: 0.2,
            reply_rate: 0.1,
            mention_rate: 0.1,
            noise_rate: 0.0,
            seed: 0,
        }
    }
}

impl SynthParams {
    /// Defaults with `communities` communities and as many topics. Topics
    /// per community are capped at the topic count.
    pub fn with_communities(communities: usize) -> Self {
        let defaults = Self::default();
        SynthParams {
            communities,
            topics: communities,
            topics_per_community: defaults.topics_per_community.min(communities.max(1)),
            ..defaults
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("communities", self.communities),
            ("users_per_community", self.users_per_community),
            ("topics", self.topics),
            ("topics_per_community", self.topics_per_community),
            ("vocab_per_topic", self.vocab_per_topic),
            ("tweets_per_user", self.tweets_per_user),
            ("tweet_length", self.tweet_length),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidParams(format!("{name} must be at least 1")));
        }
        if self.topics_per_community > self.topics {
            return Err(Error::InvalidParams(format!(
                "topics_per_community ({}) exceeds topics ({})",
                self.topics_per_community, self.topics
            )));
        }
        let probs = [
            ("p_retweet_in", self.p_retweet_in),
            ("p_retweet_out", self.p_retweet_out),
            ("hashtag_rate", self.hashtag_rate),
            ("reply_rate", self.reply_rate),
            ("mention_rate", self.mention_rate),
            ("noise_rate", self.noise_rate),
        ];
        if let Some((name, v)) = probs.iter().find(|(_, p)| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParams(format!("{name} = {v} is not a probability")));
        }
        Ok(())
    }

    pub fn user_count(&self) -> usize {
        self.communities * self.users_per_community
    }
}

pub fn topic_name(topic: usize) -> String {
    format!("topic{topic}")
}

/// Word `j` of topic `t`; alphanumeric so the tokenizer keeps it whole.
pub fn topic_word(topic: usize, j: usize) -> String {
    format!("t{topic}w{j}")
}

/// Planted structure behind a generated corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub user_community: BTreeMap<String, usize>,
    pub tweet_topic: BTreeMap<String, usize>,
    pub tweet_label: BTreeMap<String, String>,
    pub community_topics: Vec<Vec<usize>>,
    pub community_mixture: Vec<Vec<f64>>,
}

impl GroundTruth {
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// The planted user communities as a partition.
    pub fn planted_partition(&self) -> Partition {
        Partition::from_groups(self.user_community.iter().map(|(u, &c)| (u.clone(), c)))
    }
}

fn flat_dirichlet(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

fn sample_index(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let mut u = rng.gen::<f64>();
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Generates a corpus and its ground truth. Deterministic in `params`.
pub fn generate(params: &SynthParams) -> Result<(Corpus, GroundTruth)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n_users = params.user_count();
    let users: Vec<String> = (0..n_users).map(|i| format!("u{i:04}")).collect();
    let community_of = |u: usize| u / params.users_per_community;

    let community_topics: Vec<Vec<usize>> = (0..params.communities)
        .map(|c| {
            (0..params.topics_per_community)
                .map(|j| (c + j) % params.topics)
                .collect()
        })
        .collect();
    let community_mixture: Vec<Vec<f64>> = (0..params.communities)
        .map(|_| flat_dirichlet(params.topics_per_community, &mut rng))
        .collect();

    // Originals, in a shuffled interleaving of authors.
    let mut authors: Vec<usize> = (0..n_users)
        .flat_map(|u| std::iter::repeat(u).take(params.tweets_per_user))
        .collect();
    authors.shuffle(&mut rng);

    let mut tweets: Vec<Tweet> = Vec::new();
    let mut topics: Vec<usize> = Vec::new();
    let mut by_community: Vec<Vec<usize>> = vec![Vec::new(); params.communities];
    let mut by_user: Vec<Vec<usize>> = vec![Vec::new(); n_users];

    for (i, &author) in authors.iter().enumerate() {
        let c = community_of(author);
        let mut reply_to = None;
        let topic = if rng.gen::<f64>() < params.reply_rate && !by_community[c].is_empty() {
            let parent = *by_community[c].choose(&mut rng).expect("nonempty");
            reply_to = Some(tweets[parent].id.clone());
            topics[parent]
        } else {
            community_topics[c][sample_index(&community_mixture[c], &mut rng)]
        };

        let mut words: Vec<String> = (0..params.tweet_length)
            .map(|_| {
                if rng.gen::<f64>() < params.noise_rate {
                    format!("bgw{}", rng.gen_range(0..params.vocab_per_topic))
                } else {
                    topic_word(topic, rng.gen_range(0..params.vocab_per_topic))
                }
            })
            .collect();
        let mut hashtags = Vec::new();
        if rng.gen::<f64>() < params.hashtag_rate {
            let tag = format!("t{topic}h{}", rng.gen_range(0..HASHTAGS_PER_TOPIC));
            words.push(format!("#{tag}"));
            hashtags.push(tag);
        }
        let mut mentions = Vec::new();
        if rng.gen::<f64>() < params.mention_rate && params.users_per_community > 1 {
            let first = c * params.users_per_community;
            let other = loop {
                let u = first + rng.gen_range(0..params.users_per_community);
                if u != author {
                    break u;
                }
            };
            mentions.push(users[other].clone());
        }

        let idx = tweets.len();
        tweets.push(Tweet {
            id: format!("tw{i:06}"),
            author_id: users[author].clone(),
            text: words.join(" "),
            timestamp: BASE_TIMESTAMP + 60 * i as i64,
            query_label: topic_name(topic),
            hashtags,
            reply_to,
            retweet_of: None,
            mentions,
        });
        topics.push(topic);
        by_community[c].push(idx);
        by_user[author].push(idx);
    }

    // Retweets: each ordered user pair fires at most once.
    let originals = tweets.len();
    let mut retweets = 0usize;
    for u in 0..n_users {
        for v in 0..n_users {
            if u == v {
                continue;
            }
            let p = if community_of(u) == community_of(v) {
                params.p_retweet_in
            } else {
                params.p_retweet_out
            };
            if rng.gen::<f64>() >= p {
                continue;
            }
            let &orig = by_user[v].choose(&mut rng).expect("every user tweets");
            let source = &tweets[orig];
            let delay = rng.gen_range(1..=3_600);
            let retweet = Tweet {
                id: format!("rt{retweets:06}"),
                author_id: users[u].clone(),
                text: source.text.clone(),
                timestamp: source.timestamp + delay,
                query_label: source.query_label.clone(),
                hashtags: source.hashtags.clone(),
                reply_to: None,
                retweet_of: Some(source.id.clone()),
                mentions: Vec::new(),
            };
            tweets.push(retweet);
            topics.push(topics[orig]);
            retweets += 1;
        }
    }
    log::debug!("generated {originals} original tweets and {retweets} retweets");

    let truth = GroundTruth {
        user_community: users
            .iter()
            .enumerate()
            .map(|(i, u)| (u.clone(), community_of(i)))
            .collect(),
        tweet_topic: tweets.iter().zip(&topics).map(|(t, &k)| (t.id.clone(), k)).collect(),
        tweet_label: tweets
            .iter()
            .map(|t| (t.id.clone(), t.query_label.clone()))
            .collect(),
        community_topics,
        community_mixture,
    };
    Ok((Corpus::new(tweets)?, truth))
}

/// Undirected planted-partition graph: `blocks` groups of `block_size`
/// nodes, each pair joined with probability `p_in` inside a block and
/// `p_out` across blocks. Returns the graph and the planted partition.
pub fn planted_partition_graph(
    blocks: usize,
    block_size: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<(WeightedGraph, Partition)> {
    for (name, p) in [("p_in", p_in), ("p_out", p_out)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParams(format!("{name} = {p} is not a probability")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = blocks * block_size;
    let labels: Vec<String> = (0..n).map(|i| format!("n{i:04}")).collect();
    let mut graph = WeightedGraph::with_nodes(labels.iter().cloned());
    for a in 0..n {
        for b in a + 1..n {
            let p = if a / block_size == b / block_size { p_in } else { p_out };
            if rng.gen::<f64>() < p {
                graph.add_edge_between(a, b, 1.0);
            }
        }
    }
    let planted = Partition::from_groups(labels.into_iter().enumerate().map(|(i, l)| (l, i / block_size)));
    Ok((graph, planted))
}
