mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{random_social_corpus, UnionFind};
use tweetpool::graph::{build_conversation_forest, build_reply_mention_groups, build_retweet_graph};

#[test]
fn retweet_graph_matches_pair_counts() {
    for seed in 0..20 {
        let corpus = random_social_corpus(200, 15, seed);
        let (graph, stats) = build_retweet_graph(&corpus);

        let mut expected: BTreeMap<(String, String), f64> = BTreeMap::new();
        let (mut missing, mut selfs) = (0, 0);
        for t in corpus.tweets() {
            let Some(orig) = &t.retweet_of else { continue };
            match corpus.tweets().iter().find(|o| &o.id == orig) {
                None => missing += 1,
                Some(o) if o.author_id == t.author_id => selfs += 1,
                Some(o) => {
                    let (a, b) = if t.author_id < o.author_id {
                        (t.author_id.clone(), o.author_id.clone())
                    } else {
                        (o.author_id.clone(), t.author_id.clone())
                    };
                    *expected.entry((a, b)).or_default() += 1.0;
                }
            }
        }
        assert_eq!(stats.missing_original, missing);
        assert_eq!(stats.self_retweets, selfs);

        let actual: BTreeMap<(String, String), f64> = graph
            .edges()
            .map(|(a, b, w)| {
                let (x, y) = (graph.label(a).to_owned(), graph.label(b).to_owned());
                if x < y { ((x, y), w) } else { ((y, x), w) }
            })
            .collect();
        assert_eq!(actual, expected);

        let authors: BTreeSet<&str> = corpus.tweets().iter().map(|t| t.author_id.as_str()).collect();
        let nodes: BTreeSet<&str> = graph.labels().iter().map(String::as_str).collect();
        assert_eq!(nodes, authors);
    }
}

#[test]
fn forest_trees_are_union_find_components() {
    for seed in 0..20 {
        let corpus = random_social_corpus(150, 10, seed);
        let forest = build_conversation_forest(&corpus);
        let n = corpus.len();
        let mut uf = UnionFind::new(n);
        let mut broken = 0;
        for (i, t) in corpus.tweets().iter().enumerate() {
            let Some(target) = &t.reply_to else { continue };
            if let Some(j) = corpus.tweets().iter().position(|o| &o.id == target) {
                if j < i {
                    uf.union(i, j);
                } else {
                    broken += 1;
                }
            }
        }
        let mut trees = forest.trees();
        for tree in &mut trees {
            tree.sort();
        }
        trees.sort();
        assert_eq!(trees, uf.components());
        assert_eq!(forest.broken_links(), broken);
        for i in 0..n {
            let root = forest.root_of(i);
            assert!(forest.parent(root).is_none());
            assert!(root <= i);
        }
    }
}

/// Seed sets merged by repeated pairwise overlap until nothing changes.
fn reference_groups(corpus: &tweetpool::Corpus) -> BTreeSet<BTreeSet<String>> {
    let tweets = corpus.tweets();
    let mut sets: Vec<BTreeSet<String>> = Vec::new();
    for t in tweets {
        sets.push(std::iter::once(t.author_id.clone()).chain(t.mentions.iter().cloned()).collect());
    }
    for (i, t) in tweets.iter().enumerate() {
        if t.reply_to.is_some() {
            continue;
        }
        let mut seed = sets[i].clone();
        for (j, r) in tweets.iter().enumerate() {
            if j > i && r.reply_to.as_deref() == Some(t.id.as_str()) {
                seed.insert(r.author_id.clone());
                seed.extend(r.mentions.iter().cloned());
            }
        }
        sets[i] = seed;
    }
    // Replies that do not attach to an earlier original only contribute their author.
    for (i, t) in tweets.iter().enumerate() {
        if t.reply_to.is_some() {
            sets[i] = BTreeSet::from([t.author_id.clone()]);
        }
    }
    for t in tweets {
        sets.extend(t.mentions.iter().map(|m| BTreeSet::from([m.clone()])));
    }
    loop {
        let mut merged = false;
        'outer: for a in 0..sets.len() {
            for b in a + 1..sets.len() {
                if !sets[a].is_disjoint(&sets[b]) {
                    let other = sets.swap_remove(b);
                    sets[a].extend(other);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            return sets.into_iter().collect();
        }
    }
}

#[test]
fn reply_mention_groups_match_set_merging() {
    for seed in 0..10 {
        let corpus = random_social_corpus(80, 150, seed);
        let groups = build_reply_mention_groups(&corpus);
        let actual: BTreeSet<BTreeSet<String>> =
            groups.groups().iter().map(|g| g.iter().cloned().collect()).collect();
        assert!(actual.len() > 10, "fixture should produce many groups");
        assert_eq!(actual, reference_groups(&corpus), "seed {seed}");
    }
}
