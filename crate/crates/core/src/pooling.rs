//! The six pooling schemes that turn a tokenized corpus into LDA training
//! documents.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::community::{louvain, Partition};
use crate::corpus::TokenizedCorpus;
use crate::error::{Error, Result};
use crate::graph::{
    build_conversation_forest, build_reply_mention_groups, build_retweet_graph,
    ConversationForest, UserGroups,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Unpooled,
    Author,
    Hashtag,
    Conversation,
    Network,
    Community,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Unpooled,
        Scheme::Author,
        Scheme::Hashtag,
        Scheme::Conversation,
        Scheme::Network,
        Scheme::Community,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Unpooled => "unpooled",
            Scheme::Author => "author",
            Scheme::Hashtag => "hashtag",
            Scheme::Conversation => "conversation",
            Scheme::Network => "network",
            Scheme::Community => "community",
        }
    }

    /// Parses a comma-separated list; `all` expands to every scheme.
    pub fn parse_list(s: &str) -> Result<Vec<Scheme>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part.eq_ignore_ascii_case("all") {
                out.extend(Scheme::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        let mut seen = BTreeSet::new();
        out.retain(|s| seen.insert(*s));
        Ok(out)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownScheme(s.to_owned()))
    }
}

/// One training document: the concatenated tokens of its member tweets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PooledDoc {
    /// Pool key: author id, hashtag, root tweet id, and so on.
    pub key: String,
    /// Member tweet positions in corpus order.
    pub tweets: Vec<usize>,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub docs: usize,
    pub max_words: usize,
    pub mean_words: f64,
}

impl CorpusStats {
    pub fn mean_words_rounded(&self) -> u64 {
        self.mean_words.round() as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PooledCorpus {
    pub scheme: Scheme,
    docs: Vec<PooledDoc>,
    membership: Vec<Vec<usize>>,
}

impl PooledCorpus {
    /// Assembles documents from `(key, member positions)` groups. Groups
    /// without members are dropped.
    fn from_groups(
        scheme: Scheme,
        corpus: &TokenizedCorpus<'_>,
        groups: impl IntoIterator<Item = (String, Vec<usize>)>,
    ) -> Self {
        let mut membership = vec![Vec::new(); corpus.tokens.len()];
        let mut docs = Vec::new();
        for (key, mut tweets) in groups {
            if tweets.is_empty() {
                continue;
            }
            tweets.sort_unstable();
            let d = docs.len();
            let mut tokens = Vec::new();
            for &t in &tweets {
                membership[t].push(d);
                tokens.extend(corpus.tokens[t].iter().cloned());
            }
            docs.push(PooledDoc { key, tweets, tokens });
        }
        PooledCorpus {
            scheme,
            docs,
            membership,
        }
    }

    pub fn docs(&self) -> &[PooledDoc] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Document indices containing the tweet at corpus position `tweet`.
    pub fn membership(&self, tweet: usize) -> &[usize] {
        &self.membership[tweet]
    }

    /// Membership keyed by tweet id.
    pub fn membership_by_id<'c>(&self, corpus: &TokenizedCorpus<'c>) -> BTreeMap<&'c str, Vec<usize>> {
        corpus
            .corpus
            .tweets()
            .iter()
            .zip(&self.membership)
            .map(|(t, m)| (t.id.as_str(), m.clone()))
            .collect()
    }

    pub fn stats(&self) -> CorpusStats {
        corpus_stats(self)
    }
}

/// Document count, longest document and mean document length in tokens.
pub fn corpus_stats(pooled: &PooledCorpus) -> CorpusStats {
    let lengths = pooled.docs.iter().map(|d| d.tokens.len());
    let total: usize = lengths.clone().sum();
    CorpusStats {
        docs: pooled.docs.len(),
        max_words: lengths.max().unwrap_or(0),
        mean_words: if pooled.docs.is_empty() {
            0.0
        } else {
            total as f64 / pooled.docs.len() as f64
        },
    }
}

/// Each tweet is its own document.
pub fn pool_unpooled(corpus: &TokenizedCorpus<'_>) -> PooledCorpus {
    let groups = corpus
        .tweets()
        .iter()
        .enumerate()
        .map(|(i, t)| (t.id.clone(), vec![i]));
    PooledCorpus::from_groups(Scheme::Unpooled, corpus, groups)
}

/// One document per author, ordered by author id.
pub fn pool_author(corpus: &TokenizedCorpus<'_>) -> PooledCorpus {
    let mut by_author: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, t) in corpus.tweets().iter().enumerate() {
        by_author.entry(t.author_id.as_str()).or_default().push(i);
    }
    let groups = by_author.into_iter().map(|(a, v)| (a.to_owned(), v));
    PooledCorpus::from_groups(Scheme::Author, corpus, groups)
}

/// One document per hashtag (sorted), then one singleton document per tweet
/// without hashtags. A tweet with several hashtags joins several documents.
pub fn pool_hashtag(corpus: &TokenizedCorpus<'_>) -> PooledCorpus {
    let mut by_tag: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut untagged = Vec::new();
    for (i, t) in corpus.tweets().iter().enumerate() {
        let tags: BTreeSet<&str> = t.hashtags.iter().map(String::as_str).collect();
        if tags.is_empty() {
            untagged.push((t.id.clone(), vec![i]));
        }
        for tag in tags {
            by_tag.entry(tag).or_default().push(i);
        }
    }
    let groups = by_tag
        .into_iter()
        .map(|(tag, v)| (format!("#{}", tag.trim_start_matches('#')), v))
        .chain(untagged);
    PooledCorpus::from_groups(Scheme::Hashtag, corpus, groups)
}

/// One document per conversation tree, ordered by root.
pub fn pool_conversation(
    corpus: &TokenizedCorpus<'_>,
    forest: &ConversationForest,
) -> Result<PooledCorpus> {
    if forest.len() != corpus.tokens.len() {
        return Err(Error::Mismatch(format!(
            "forest covers {} tweets, corpus has {}",
            forest.len(),
            corpus.tokens.len()
        )));
    }
    let tweets = corpus.tweets();
    let groups = forest
        .trees()
        .into_iter()
        .map(|members| (tweets[members[0]].id.clone(), members));
    Ok(PooledCorpus::from_groups(Scheme::Conversation, corpus, groups))
}

/// One document per user group holding every tweet its members authored.
/// Groups whose members authored nothing produce no document.
pub fn pool_network(corpus: &TokenizedCorpus<'_>, groups: &UserGroups) -> Result<PooledCorpus> {
    let mut members = vec![Vec::new(); groups.len()];
    for (i, t) in corpus.tweets().iter().enumerate() {
        let g = groups
            .group_of(&t.author_id)
            .ok_or_else(|| Error::MissingAuthor(t.author_id.clone()))?;
        members[g].push(i);
    }
    let keyed = groups
        .groups()
        .iter()
        .zip(members)
        .map(|(g, m)| (g[0].clone(), m));
    Ok(PooledCorpus::from_groups(Scheme::Network, corpus, keyed))
}

/// One document per community of the retweet graph holding every tweet
/// authored by its members.
pub fn pool_community(corpus: &TokenizedCorpus<'_>, partition: &Partition) -> Result<PooledCorpus> {
    let mut members = vec![Vec::new(); partition.count()];
    for (i, t) in corpus.tweets().iter().enumerate() {
        let c = partition
            .community_of(&t.author_id)
            .ok_or_else(|| Error::MissingAuthor(t.author_id.clone()))?;
        members[c].push(i);
    }
    let keyed = members
        .into_iter()
        .enumerate()
        .map(|(c, m)| (format!("community-{c}"), m));
    Ok(PooledCorpus::from_groups(Scheme::Community, corpus, keyed))
}

/// Parameters for the graph-based schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolingOptions {
    pub resolution: f64,
    pub louvain_seed: u64,
}

impl Default for PoolingOptions {
    fn default() -> Self {
        PoolingOptions {
            resolution: 1.0,
            louvain_seed: 0,
        }
    }
}

/// Pools `corpus` under `scheme`, building whatever interaction structure
/// the scheme needs.
pub fn pool(scheme: Scheme, corpus: &TokenizedCorpus<'_>, options: &PoolingOptions) -> Result<PooledCorpus> {
    match scheme {
        Scheme::Unpooled => Ok(pool_unpooled(corpus)),
        Scheme::Author => Ok(pool_author(corpus)),
        Scheme::Hashtag => Ok(pool_hashtag(corpus)),
        Scheme::Conversation => pool_conversation(corpus, &build_conversation_forest(corpus.corpus)),
        Scheme::Network => pool_network(corpus, &build_reply_mention_groups(corpus.corpus)),
        Scheme::Community => {
            let (graph, _) = build_retweet_graph(corpus.corpus);
            let partition = louvain(&graph, options.resolution, options.louvain_seed);
            pool_community(corpus, &partition)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, Stopwords, Tweet};

    fn tw(id: &str, author: &str, ts: i64, text: &str, tags: &[&str]) -> Tweet {
        Tweet {
            id: id.into(),
            author_id: author.into(),
            text: text.into(),
            timestamp: ts,
            query_label: "x".into(),
            hashtags: tags.iter().map(|s| s.to_string()).collect(),
            reply_to: None,
            retweet_of: None,
            mentions: vec![],
        }
    }

    fn sizes(p: &PooledCorpus) -> Vec<usize> {
        p.docs().iter().map(|d| d.tweets.len()).collect()
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("Community".parse::<Scheme>().unwrap(), Scheme::Community);
        assert!("temporal".parse::<Scheme>().is_err());
        assert_eq!(Scheme::parse_list("all").unwrap().len(), 6);
        assert_eq!(
            Scheme::parse_list("community, unpooled,community").unwrap(),
            vec![Scheme::Community, Scheme::Unpooled]
        );
    }

    #[test]
    fn unpooled_and_author() {
        let c = Corpus::new(vec![
            tw("t1", "u1", 1, "alpha beta", &[]),
            tw("t2", "u1", 2, "gamma", &[]),
            tw("t3", "u2", 3, "delta", &[]),
        ])
        .unwrap();
        let tc = c.tokenize(&Stopwords::default());
        let un = pool_unpooled(&tc);
        assert_eq!(un.len(), 3);
        assert_eq!(un.membership(1), &[1]);
        let au = pool_author(&tc);
        assert_eq!(sizes(&au), vec![2, 1]);
        assert_eq!(au.docs()[0].tokens, vec!["alpha", "beta", "gamma"]);

        let empty = Corpus::default();
        assert!(pool_unpooled(&empty.tokenize(&Stopwords::default())).is_empty());
    }

    #[test]
    fn hashtag_documents() {
        let c = Corpus::new(vec![
            tw("t1", "u1", 1, "one two", &["A", "b"]),
            tw("t2", "u2", 2, "three", &["a"]),
            tw("t3", "u3", 3, "four", &[]),
        ])
        .unwrap();
        let tc = c.tokenize(&Stopwords::default());
        let p = pool_hashtag(&tc);
        let keys: Vec<_> = p.docs().iter().map(|d| d.key.as_str()).collect();
        assert_eq!(keys, ["#a", "#b", "t3"]);
        assert_eq!(sizes(&p), vec![2, 1, 1]);
        assert_eq!(p.membership(0), &[0, 1]);
        let total: usize = p.docs().iter().map(|d| d.tokens.len()).sum();
        assert_eq!(total, 2 * 2 + 1 + 1);
    }

    #[test]
    fn conversation_and_network() {
        let mut t2 = tw("t2", "u2", 2, "b", &[]);
        t2.reply_to = Some("t1".into());
        let mut t3 = tw("t3", "u3", 3, "c", &[]);
        t3.reply_to = Some("t2".into());
        let c = Corpus::new(vec![tw("t1", "u1", 1, "a", &[]), t2, t3, tw("t4", "u4", 4, "d", &[])]).unwrap();
        let tc = c.tokenize(&Stopwords::default());
        let forest = build_conversation_forest(&c);
        let p = pool_conversation(&tc, &forest).unwrap();
        assert_eq!(sizes(&p), vec![3, 1]);
        assert_eq!(p.len(), forest.roots().len());

        let groups = UserGroups::new(vec![
            vec!["u1".into(), "u2".into(), "u3".into()],
            vec!["u4".into()],
            vec!["ghost".into()],
        ])
        .unwrap();
        let p = pool_network(&tc, &groups).unwrap();
        assert_eq!(sizes(&p), vec![3, 1]);
    }

    #[test]
    fn community_requires_every_author() {
        let c = Corpus::new(vec![tw("t1", "u1", 1, "a", &[]), tw("t2", "u2", 2, "b", &[])]).unwrap();
        let tc = c.tokenize(&Stopwords::default());
        let p = Partition::from_groups([("u1", 0)]);
        assert!(matches!(pool_community(&tc, &p), Err(Error::MissingAuthor(a)) if a == "u2"));
    }

    #[test]
    fn community_groups_members() {
        let c = Corpus::new(vec![
            tw("t1", "u1", 1, "a", &[]),
            tw("t2", "u2", 2, "b", &[]),
            tw("t3", "u2", 3, "c", &[]),
            tw("t4", "u3", 4, "d", &[]),
        ])
        .unwrap();
        let tc = c.tokenize(&Stopwords::default());
        let p = Partition::from_groups([("u1", 0), ("u2", 0), ("u3", 1)]);
        let pooled = pool_community(&tc, &p).unwrap();
        assert_eq!(sizes(&pooled), vec![3, 1]);
        assert_eq!(pooled.docs()[0].tokens, vec!["a", "b", "c"]);
    }

    #[test]
    fn stats_of_known_sizes() {
        let c = Corpus::new(vec![
            tw("t1", "u1", 1, "a b", &[]),
            tw("t2", "u2", 2, "c d e f", &[]),
        ])
        .unwrap();
        let tc = c.tokenize(&Stopwords::default());
        let s = pool_unpooled(&tc).stats();
        assert_eq!((s.docs, s.max_words, s.mean_words_rounded()), (2, 4, 3));
    }
}
