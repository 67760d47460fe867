//! Tweet ingestion, preprocessing, time-ordered splitting and vocabulary.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

/// One microblog post, labeled by the query that retrieved it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub author_id: String,
    pub text: String,
    pub timestamp: i64,
    pub query_label: String,
    #[serde(default)]
    pub hashtags: Vec<String>,
    #[serde(default)]
    pub reply_to: Option<String>,
    #[serde(default)]
    pub retweet_of: Option<String>,
    #[serde(default)]
    pub mentions: Vec<String>,
}

impl Tweet {
    /// Lowercases hashtags and checks the per-tweet invariants.
    fn normalize(mut self) -> Result<Self> {
        let invalid = |reason| Error::InvalidTweet {
            id: self.id.clone(),
            reason,
        };
        if self.reply_to.as_deref() == Some(self.id.as_str()) {
            return Err(invalid("reply_to references the tweet itself"));
        }
        if self.retweet_of.as_deref() == Some(self.id.as_str()) {
            return Err(invalid("retweet_of references the tweet itself"));
        }
        if self.hashtags.iter().any(|h| h.chars().any(char::is_whitespace)) {
            return Err(invalid("hashtag contains whitespace"));
        }
        for tag in &mut self.hashtags {
            *tag = tag.to_lowercase();
        }
        Ok(self)
    }

    fn order_key(&self) -> (i64, &str) {
        (self.timestamp, self.id.as_str())
    }
}

/// A labeled tweet collection sorted by `(timestamp, id)`.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    tweets: Vec<Tweet>,
    labels: BTreeSet<String>,
    index: HashMap<String, usize>,
}

impl Corpus {
    /// Builds a corpus from tweets in any order. Fails on duplicate ids or
    /// self-referencing tweets.
    pub fn new(tweets: Vec<Tweet>) -> Result<Self> {
        let labels = tweets.iter().map(|t| t.query_label.clone()).collect();
        Self::with_labels(tweets, labels)
    }

    /// Like [`Corpus::new`] but keeps a label set that may be larger than the
    /// labels actually present (used for train/test halves).
    pub fn with_labels(tweets: Vec<Tweet>, mut labels: BTreeSet<String>) -> Result<Self> {
        let mut tweets = tweets
            .into_iter()
            .map(Tweet::normalize)
            .collect::<Result<Vec<_>>>()?;
        tweets.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
        let mut index = HashMap::with_capacity(tweets.len());
        for (i, t) in tweets.iter().enumerate() {
            if index.insert(t.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(t.id.clone()));
            }
            labels.insert(t.query_label.clone());
        }
        Ok(Corpus {
            tweets,
            labels,
            index,
        })
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn labels(&self) -> &BTreeSet<String> {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    /// Position of a tweet in corpus order.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn get(&self, id: &str) -> Option<&Tweet> {
        self.position(id).map(|i| &self.tweets[i])
    }

    /// Distinct author ids, sorted.
    pub fn authors(&self) -> BTreeSet<&str> {
        self.tweets.iter().map(|t| t.author_id.as_str()).collect()
    }

    pub fn tokenize(&self, stopwords: &Stopwords) -> TokenizedCorpus<'_> {
        TokenizedCorpus {
            corpus: self,
            tokens: self
                .tweets
                .iter()
                .map(|t| tokenize(&t.text, stopwords))
                .collect(),
        }
    }

    pub fn into_tweets(self) -> Vec<Tweet> {
        self.tweets
    }
}

/// A corpus together with the token list of every tweet, aligned by position.
#[derive(Debug, Clone)]
pub struct TokenizedCorpus<'a> {
    pub corpus: &'a Corpus,
    pub tokens: Vec<Vec<String>>,
}

impl TokenizedCorpus<'_> {
    pub fn tweets(&self) -> &[Tweet] {
        self.corpus.tweets()
    }

    pub fn total_tokens(&self) -> usize {
        self.tokens.iter().map(Vec::len).sum()
    }
}

/// Parses a JSONL file into tweets without enforcing corpus invariants.
/// Blank lines are skipped.
pub fn read_jsonl_tweets(path: impl AsRef<Path>) -> Result<Vec<Tweet>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut tweets = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let tweet: Tweet = serde_json::from_str(line).map_err(|e| Error::MalformedLine {
            line: i + 1,
            message: e.to_string(),
        })?;
        let tweet = tweet.normalize().map_err(|e| Error::MalformedLine {
            line: i + 1,
            message: e.to_string(),
        })?;
        tweets.push(tweet);
    }
    Ok(tweets)
}

/// Loads a JSONL tweet file into a sorted corpus.
pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Corpus> {
    Corpus::new(read_jsonl_tweets(path)?)
}

pub fn write_jsonl(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for tweet in corpus.tweets() {
        serde_json::to_writer(&mut out, tweet)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// A lowercase stopword set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    /// The bundled English list.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    /// One token per line; blank lines ignored, entries lowercased.
    pub fn parse(text: &str) -> Self {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: AsRef<str>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Stopwords(iter.into_iter().map(|s| s.as_ref().to_lowercase()).collect())
    }
}

/// Lowercases `text` and splits it into runs of alphanumeric characters.
/// A single `#` or `@` directly before a run stays attached to it. Stopwords
/// and punctuation-only fragments are dropped.
pub fn tokenize(text: &str, stopwords: &Stopwords) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut pending_prefix: Option<char> = None;

    let flush = |current: &mut String, tokens: &mut Vec<String>| {
        if current.chars().any(char::is_alphanumeric) && !stopwords.contains(current) {
            tokens.push(std::mem::take(current));
        } else {
            current.clear();
        }
    };

    for c in lower.chars() {
        if c.is_alphanumeric() {
            if current.is_empty() {
                if let Some(p) = pending_prefix.take() {
                    current.push(p);
                }
            }
            current.push(c);
        } else {
            flush(&mut current, &mut tokens);
            pending_prefix = matches!(c, '#' | '@').then_some(c);
        }
    }
    flush(&mut current, &mut tokens);
    tokens
}

/// Drops every tweet id that was retrieved under two or more distinct query
/// labels; exact repeats under one label collapse to the first occurrence.
pub fn dedupe_multilabel(tweets: Vec<Tweet>) -> Result<Corpus> {
    let mut labels_by_id: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for t in &tweets {
        labels_by_id
            .entry(t.id.as_str())
            .or_default()
            .insert(t.query_label.as_str());
    }
    let conflicted: HashSet<String> = labels_by_id
        .into_iter()
        .filter(|(_, labels)| labels.len() > 1)
        .map(|(id, _)| id.to_owned())
        .collect();

    let mut seen = HashSet::new();
    let kept = tweets
        .into_iter()
        .filter(|t| !conflicted.contains(&t.id) && seen.insert(t.id.clone()))
        .collect();
    Corpus::new(kept)
}

/// Splits by time: the first `ceil(train_fraction * n)` tweets go to train.
/// Both halves keep the full label set of the input.
pub fn time_split(corpus: &Corpus, train_fraction: f64) -> Result<(Corpus, Corpus)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidSplit(train_fraction));
    }
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let n = corpus.len();
    // The epsilon keeps products such as 0.7 * 10 = 7.000000000000001 at 7.
    let boundary = ((train_fraction * n as f64) - 1e-9).ceil().max(0.0) as usize;
    let boundary = boundary.min(n);
    let train = corpus.tweets[..boundary].to_vec();
    let test = corpus.tweets[boundary..].to_vec();
    Ok((
        Corpus::with_labels(train, corpus.labels.clone())?,
        Corpus::with_labels(test, corpus.labels.clone())?,
    ))
}

/// Token index with corpus frequencies. Indices are dense and follow
/// first-occurrence order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from token lists, keeping tokens seen at least
    /// `min_count` times.
    pub fn from_token_lists<'a, I>(lists: I, min_count: u64) -> Self
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut order: Vec<&str> = Vec::new();
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for list in lists {
            for tok in list {
                let slot = freq.entry(tok.as_str()).or_insert_with(|| {
                    order.push(tok.as_str());
                    0
                });
                *slot += 1;
            }
        }
        let min_count = min_count.max(1);
        let mut vocab = Vocabulary::default();
        for tok in order {
            let count = freq[tok];
            if count >= min_count {
                vocab.index.insert(tok.to_owned(), vocab.tokens.len());
                vocab.tokens.push(tok.to_owned());
                vocab.counts.push(count);
            }
        }
        vocab
    }

    /// Rebuilds a vocabulary from its serialized parts.
    pub fn from_parts(tokens: Vec<String>, counts: Vec<u64>) -> Result<Self> {
        if tokens.len() != counts.len() {
            return Err(Error::Mismatch(format!(
                "{} vocabulary tokens but {} counts",
                tokens.len(),
                counts.len()
            )));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::DuplicateId(t.clone()));
            }
        }
        Ok(Vocabulary {
            tokens,
            counts,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Maps tokens to indices, dropping out-of-vocabulary ones. Returns the
    /// ids and the number dropped.
    pub fn encode(&self, tokens: &[String]) -> (Vec<usize>, usize) {
        let ids: Vec<usize> = tokens.iter().filter_map(|t| self.index_of(t)).collect();
        let dropped = tokens.len() - ids.len();
        (ids, dropped)
    }
}

/// Vocabulary over every tweet of `corpus` after tokenization.
pub fn build_vocabulary(corpus: &Corpus, stopwords: &Stopwords, min_count: u64) -> Vocabulary {
    let tokenized = corpus.tokenize(stopwords);
    Vocabulary::from_token_lists(tokenized.tokens.iter().map(Vec::as_slice), min_count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn tweet(id: &str, author: &str, ts: i64, label: &str) -> Tweet {
        Tweet {
            id: id.into(),
            author_id: author.into(),
            text: String::new(),
            timestamp: ts,
            query_label: label.into(),
            hashtags: vec![],
            reply_to: None,
            retweet_of: None,
            mentions: vec![],
        }
    }

    fn sw(words: &[&str]) -> Stopwords {
        words.iter().collect()
    }

    #[test]
    fn tokenize_basic() {
        assert_eq!(
            tokenize("The Music IS great", &sw(&["the", "is"])),
            vec!["music", "great"]
        );
        assert!(tokenize("", &sw(&[])).is_empty());
        assert_eq!(
            tokenize("Go #Inauguration2021 @JoeBiden!", &sw(&["go"])),
            vec!["#inauguration2021", "@joebiden"]
        );
    }

    #[test]
    fn tokenize_drops_punctuation_only() {
        assert_eq!(tokenize("... # @ !!! ok", &sw(&[])), vec!["ok"]);
        assert_eq!(tokenize("a#b", &sw(&[])), vec!["a", "#b"]);
        assert_eq!(tokenize("##tag", &sw(&[])), vec!["#tag"]);
    }

    #[test]
    fn stopword_file_parses() {
        let s = Stopwords::parse("The\n\n and \n");
        assert!(s.contains("the"));
        assert!(s.contains("and"));
        assert_eq!(s.len(), 2);
        assert!(Stopwords::english().contains("the"));
    }

    #[test]
    fn dedupe_removes_conflicts() {
        let c = dedupe_multilabel(vec![
            tweet("t1", "u", 1, "a"),
            tweet("t1", "u", 1, "b"),
            tweet("t2", "u", 2, "a"),
        ])
        .unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.tweets()[0].id, "t2");

        let c = dedupe_multilabel(vec![tweet("t1", "u", 1, "a"), tweet("t1", "u", 1, "a")]).unwrap();
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn corpus_rejects_duplicates_and_self_reference() {
        let err = Corpus::new(vec![tweet("t1", "u", 1, "a"), tweet("t1", "v", 2, "a")]).unwrap_err();
        assert_eq!(err.to_string(), "duplicate id t1");
        let mut t = tweet("t1", "u", 1, "a");
        t.reply_to = Some("t1".into());
        assert!(matches!(Corpus::new(vec![t]), Err(Error::InvalidTweet { .. })));
    }

    #[test]
    fn split_sizes() {
        let make = |n: usize| {
            Corpus::new(
                (0..n)
                    .map(|i| tweet(&format!("t{i:02}"), "u", i as i64, "a"))
                    .collect(),
            )
            .unwrap()
        };
        for (n, frac, expect) in [(10, 0.8, 8), (1, 0.8, 1), (5, 0.5, 3), (10, 0.7, 7)] {
            let (train, test) = time_split(&make(n), frac).unwrap();
            assert_eq!((train.len(), test.len()), (expect, n - expect), "n={n} f={frac}");
        }
        assert!(matches!(time_split(&make(3), 1.0), Err(Error::InvalidSplit(_))));
        assert!(matches!(time_split(&make(3), 0.0), Err(Error::InvalidSplit(_))));
        assert!(matches!(time_split(&make(0), 0.5), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn split_breaks_timestamp_ties_by_id() {
        let c = Corpus::new(vec![
            tweet("b", "u", 5, "x"),
            tweet("a", "u", 5, "y"),
            tweet("c", "u", 1, "x"),
        ])
        .unwrap();
        let ids: Vec<_> = c.tweets().iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids, ["c", "a", "b"]);
        let (train, test) = time_split(&c, 0.5).unwrap();
        assert_eq!(train.len(), 2);
        assert_eq!(test.tweets()[0].id, "b");
        assert_eq!(test.labels().len(), 2);
    }

    #[test]
    fn vocabulary_threshold() {
        let lists = vec![
            vec!["a".to_string(), "b".to_string()],
            vec!["a".to_string(), "a".to_string()],
        ];
        let v = Vocabulary::from_token_lists(lists.iter().map(Vec::as_slice), 2);
        assert_eq!(v.tokens(), ["a"]);
        assert_eq!(v.counts(), [3]);
        let v = Vocabulary::from_token_lists(lists.iter().map(Vec::as_slice), 1);
        assert_eq!(v.tokens(), ["a", "b"]);
        assert_eq!(v.index_of("b"), Some(1));
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in "[a-zA-Z0-9 #@!.,'éÜß_-]{0,60}") {
            let stop = sw(&["the", "a"]);
            let once = tokenize(&text, &stop);
            let twice = tokenize(&once.join(" "), &stop);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn split_concatenation_is_identity(n in 1usize..60, frac in 0.01f64..0.99) {
            let c = Corpus::new(
                (0..n).map(|i| tweet(&format!("t{i}"), "u", (i % 7) as i64, "a")).collect(),
            ).unwrap();
            let (train, test) = time_split(&c, frac).unwrap();
            let joined: Vec<_> = train.tweets().iter().chain(test.tweets()).cloned().collect();
            prop_assert_eq!(joined, c.tweets().to_vec());
        }

        #[test]
        fn vocabulary_round_trip(words in proptest::collection::vec("[a-e]{1,3}", 0..40)) {
            let v = Vocabulary::from_token_lists(std::iter::once(words.as_slice()), 1);
            for (i, t) in v.tokens().iter().enumerate() {
                prop_assert_eq!(v.index_of(t), Some(i));
                prop_assert_eq!(v.token(i), Some(t.as_str()));
            }
        }
    }
}
