#![allow(dead_code)]

use tweetpool::corpus::Tweet;

pub fn tweet(id: &str, author: &str, text: &str, timestamp: i64, label: &str) -> Tweet {
    Tweet {
        id: id.to_owned(),
        author_id: author.to_owned(),
        text: text.to_owned(),
        timestamp,
        query_label: label.to_owned(),
        hashtags: Vec::new(),
        reply_to: None,
        retweet_of: None,
        mentions: Vec::new(),
    }
}

/// Minimal disjoint-set forest used as an independent reference.
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Components as sorted member lists, ordered by smallest member.
    pub fn components(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..n {
            let r = self.find(i);
            by_root.entry(r).or_default().push(i);
        }
        let mut comps: Vec<Vec<usize>> = by_root.into_values().collect();
        comps.sort();
        comps
    }
}

/// Random corpus with retweets, replies (some dangling or forward) and
/// mentions, for structural oracles.
pub fn random_social_corpus(n: usize, users: usize, seed: u64) -> tweetpool::Corpus {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let tweets = (0..n)
        .map(|i| {
            let author = format!("u{}", rng.gen_range(0..users));
            let mut t = tweet(&format!("t{i:04}"), &author, "word", i as i64, "q");
            let r: f64 = rng.gen();
            let target = if rng.gen_bool(0.1) {
                format!("missing{i}")
            } else {
                format!("t{:04}", rng.gen_range(0..n))
            };
            if target == t.id {
            } else if r < 0.3 {
                t.retweet_of = Some(target);
            } else if r < 0.6 {
                t.reply_to = Some(target);
            }
            for _ in 0..rng.gen_range(0..3) {
                t.mentions.push(format!("u{}", rng.gen_range(0..users + 3)));
            }
            t
        })
        .collect();
    tweetpool::Corpus::new(tweets).unwrap()
}

/// Two communities, each tweeting about one topic with its own vocabulary.
pub fn separation_fixture(seed: u64) -> tweetpool::Corpus {
    let params = tweetpool::synth::SynthParams {
        communities: 2,
        topics: 2,
        topics_per_community: 1,
        users_per_community: 20,
        vocab_per_topic: 50,
        tweets_per_user: 5,
        tweet_length: 8,
        hashtag_rate: 0.0,
        seed,
        ..Default::default()
    };
    tweetpool::synth::generate(&params).unwrap().0
}

/// Probability mass that a topic row places on words of planted topic `t`.
pub fn mass_on_topic(model: &tweetpool::TopicModel, row: usize, t: usize) -> f64 {
    let prefix = format!("t{t}w");
    model
        .vocab()
        .tokens()
        .iter()
        .zip(model.phi_row(row))
        .filter(|(w, _)| w.starts_with(&prefix))
        .map(|(_, p)| p)
        .sum()
}
