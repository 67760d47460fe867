//! User-interaction structures built from a corpus: the weighted retweet
//! graph, conversation trees and reply/mention user groups.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::warn;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Undirected weighted graph over string-labeled nodes.
///
/// Ordinary edges never connect a node to itself. Aggregated graphs produced
/// during community detection carry each community's internal weight as a
/// separate per-node self weight instead, so that degree and total weight
/// stay consistent with the graph they were folded from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedGraph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<BTreeMap<usize, f64>>,
    self_weight: Vec<f64>,
}

impl WeightedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graph with the given nodes and no edges.
    pub fn with_nodes<I, S>(nodes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut g = Self::new();
        for n in nodes {
            g.add_node(n);
        }
        g
    }

    /// Adds a node if absent and returns its index.
    pub fn add_node(&mut self, label: impl Into<String>) -> usize {
        let label = label.into();
        if let Some(&i) = self.index.get(&label) {
            return i;
        }
        let i = self.labels.len();
        self.index.insert(label.clone(), i);
        self.labels.push(label);
        self.adj.push(BTreeMap::new());
        self.self_weight.push(0.0);
        i
    }

    /// Adds `weight` to the undirected edge `(u, v)`, creating nodes as needed.
    pub fn add_edge(&mut self, u: &str, v: &str, weight: f64) -> Result<()> {
        let invalid = |reason| Error::InvalidEdge {
            u: u.to_owned(),
            v: v.to_owned(),
            weight,
            reason,
        };
        if u == v {
            return Err(invalid("self-loop"));
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(invalid("weight must be positive and finite"));
        }
        let a = self.add_node(u);
        let b = self.add_node(v);
        self.add_edge_between(a, b, weight);
        Ok(())
    }

    pub(crate) fn add_edge_between(&mut self, a: usize, b: usize, weight: f64) {
        debug_assert!(a != b && weight > 0.0);
        *self.adj[a].entry(b).or_insert(0.0) += weight;
        *self.adj[b].entry(a).or_insert(0.0) += weight;
    }

    pub(crate) fn add_self_weight(&mut self, node: usize, weight: f64) {
        self.self_weight[node] += weight;
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeMap::len).sum::<usize>() / 2
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn node_index(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adj[node].iter().map(|(&v, &w)| (v, w))
    }

    /// Weight of the edge between two labeled nodes (0 when absent).
    pub fn weight(&self, u: &str, v: &str) -> f64 {
        match (self.node_index(u), self.node_index(v)) {
            (Some(a), Some(b)) => self.adj[a].get(&b).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }

    /// Every edge once, as `(a, b, w)` with `a < b`, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj.iter().enumerate().flat_map(|(a, row)| {
            row.range(a + 1..).map(move |(&b, &w)| (a, b, w))
        })
    }

    pub fn self_weight(&self, node: usize) -> f64 {
        self.self_weight[node]
    }

    /// Weighted degree; a self weight counts twice, as both endpoints lie in
    /// the node.
    pub fn degree(&self, node: usize) -> f64 {
        self.adj[node].values().sum::<f64>() + 2.0 * self.self_weight[node]
    }

    /// Total edge weight `m`, including self weights.
    pub fn total_weight(&self) -> f64 {
        self.edges().map(|(_, _, w)| w).sum::<f64>() + self.self_weight.iter().sum::<f64>()
    }

    /// Writes `u v w` per edge.
    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for (a, b, w) in self.edges() {
            writeln!(out, "{} {} {}", self.labels[a], self.labels[b], w)
                .map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

/// Counters from retweet graph construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RetweetStats {
    /// Retweets that became edge weight.
    pub counted: usize,
    /// Retweets whose original is not in the corpus.
    pub missing_original: usize,
    pub self_retweets: usize,
}

/// Undirected retweet graph: one node per author, and each in-corpus retweet
/// adds 1 to the edge between retweeter and original author.
pub fn build_retweet_graph(corpus: &Corpus) -> (WeightedGraph, RetweetStats) {
    let mut graph = WeightedGraph::with_nodes(corpus.authors());
    let mut stats = RetweetStats::default();
    for tweet in corpus.tweets() {
        let Some(orig_id) = tweet.retweet_of.as_deref() else {
            continue;
        };
        match corpus.get(orig_id) {
            None => stats.missing_original += 1,
            Some(orig) if orig.author_id == tweet.author_id => stats.self_retweets += 1,
            Some(orig) => {
                let a = graph.node_index(&tweet.author_id).expect("author is a node");
                let b = graph.node_index(&orig.author_id).expect("author is a node");
                graph.add_edge_between(a, b, 1.0);
                stats.counted += 1;
            }
        }
    }
    if stats.missing_original > 0 {
        warn!(
            "{} retweets reference tweets outside the corpus and were skipped",
            stats.missing_original
        );
    }
    (graph, stats)
}

/// Reply trees over a corpus, indexed by corpus position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConversationForest {
    parent: Vec<Option<usize>>,
    root: Vec<usize>,
    broken_links: usize,
}

impl ConversationForest {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, tweet: usize) -> Option<usize> {
        self.parent[tweet]
    }

    pub fn root_of(&self, tweet: usize) -> usize {
        self.root[tweet]
    }

    /// Root positions in corpus order.
    pub fn roots(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.parent[i].is_none()).collect()
    }

    /// Reply links dropped because they pointed forward in time (which
    /// includes every link that would close a cycle).
    pub fn broken_links(&self) -> usize {
        self.broken_links
    }

    /// Members of each tree in corpus order; trees ordered by root position.
    pub fn trees(&self) -> Vec<Vec<usize>> {
        let mut slot = vec![usize::MAX; self.len()];
        let mut trees: Vec<Vec<usize>> = Vec::new();
        for i in 0..self.len() {
            let r = self.root[i];
            if slot[r] == usize::MAX {
                slot[r] = trees.len();
                trees.push(Vec::new());
            }
            trees[slot[r]].push(i);
        }
        trees
    }

    /// The parent relation as tweet ids.
    pub fn parent_ids<'a>(&self, corpus: &'a Corpus) -> BTreeMap<&'a str, &'a str> {
        let tweets = corpus.tweets();
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| (tweets[i].id.as_str(), tweets[p].id.as_str())))
            .collect()
    }
}

/// Follows `reply_to` links to in-corpus tweets. Replies to missing tweets
/// start their own tree. A link to a tweet that does not precede the reply in
/// corpus order is broken and counted.
pub fn build_conversation_forest(corpus: &Corpus) -> ConversationForest {
    let n = corpus.len();
    let mut parent = vec![None; n];
    let mut root: Vec<usize> = (0..n).collect();
    let mut broken_links = 0;
    for (i, tweet) in corpus.tweets().iter().enumerate() {
        let Some(target) = tweet.reply_to.as_deref().and_then(|id| corpus.position(id)) else {
            continue;
        };
        if target < i {
            parent[i] = Some(target);
            root[i] = root[target];
        } else {
            broken_links += 1;
        }
    }
    if broken_links > 0 {
        warn!("broke {broken_links} reply links that pointed forward in time");
    }
    ConversationForest {
        parent,
        root,
        broken_links,
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// A partition of user ids into interaction groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserGroups {
    groups: Vec<Vec<String>>,
    group_of: HashMap<String, usize>,
}

impl UserGroups {
    /// Groups are normalized: members sorted, groups ordered by first member.
    pub fn new(groups: Vec<Vec<String>>) -> Result<Self> {
        let mut groups: Vec<Vec<String>> = groups
            .into_iter()
            .filter(|g| !g.is_empty())
            .map(|mut g| {
                g.sort();
                g.dedup();
                g
            })
            .collect();
        groups.sort();
        let mut group_of = HashMap::new();
        for (gi, g) in groups.iter().enumerate() {
            for u in g {
                if group_of.insert(u.clone(), gi).is_some() {
                    return Err(Error::InvalidPartition(format!("user {u} is in two groups")));
                }
            }
        }
        Ok(UserGroups { groups, group_of })
    }

    pub fn groups(&self) -> &[Vec<String>] {
        &self.groups
    }

    pub fn group_of(&self, user: &str) -> Option<usize> {
        self.group_of.get(user).copied()
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Network-based user groups: every original tweet (no `reply_to`) seeds the
/// set of its author, its mentions, and the authors and mentions of its
/// direct replies. Overlapping seed sets merge transitively; users in no seed
/// set stay alone.
pub fn build_reply_mention_groups(corpus: &Corpus) -> UserGroups {
    let mut users: BTreeSet<&str> = BTreeSet::new();
    for t in corpus.tweets() {
        users.insert(&t.author_id);
        users.extend(t.mentions.iter().map(String::as_str));
    }
    let users: Vec<&str> = users.into_iter().collect();
    let idx: HashMap<&str, usize> = users.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let mut sets = DisjointSets::new(users.len());

    let tweets = corpus.tweets();
    for (i, t) in tweets.iter().enumerate() {
        let a = idx[t.author_id.as_str()];
        let Some(reply_to) = t.reply_to.as_deref() else {
            for m in &t.mentions {
                sets.union(a, idx[m.as_str()]);
            }
            continue;
        };
        let Some(p) = corpus.position(reply_to) else {
            continue;
        };
        let original = &tweets[p];
        if p >= i || original.reply_to.is_some() {
            continue;
        }
        let root = idx[original.author_id.as_str()];
        sets.union(root, a);
        for m in &t.mentions {
            sets.union(root, idx[m.as_str()]);
        }
    }

    let mut by_root: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, u) in users.iter().enumerate() {
        by_root.entry(sets.find(i)).or_default().push((*u).to_owned());
    }
    UserGroups::new(by_root.into_values().collect()).expect("disjoint by construction")
}
