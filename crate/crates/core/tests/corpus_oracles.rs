mod common;

use std::collections::{BTreeMap, HashMap};

use common::tweet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use tweetpool::corpus::{
    dedupe_multilabel, load_jsonl, time_split, tokenize, write_jsonl, Stopwords, Vocabulary,
};
use tweetpool::{Corpus, Error};

fn reference_tokenize(text: &str, stopwords: &Stopwords) -> Vec<String> {
    let re = Regex::new(r"[#@]?[\p{Alphabetic}\p{N}]+").unwrap();
    re.find_iter(&text.to_lowercase())
        .map(|m| m.as_str().to_owned())
        .filter(|t| !stopwords.contains(t))
        .collect()
}

#[test]
fn tokenizer_matches_regex_reference() {
    let stop = Stopwords::english();
    let samples = [
        "Hello, world!",
        "RT @someone: The game was GREAT #win",
        "##double and @@twice",
        "a#b c@d e#",
        "trailing hash #",
        "numbers 2024 and 3.14 and 1,000",
        "Ünïcödé wörds ÅND straße",
        "emoji 🎉 party🎉time",
        "mixed-case Hyphen-ated words",
        "under_score snake_case",
        "   lots   of    space   ",
        "",
        "!!!???...",
        "#ALLCAPS #MiXeD #lower",
        "@user1 @user2 hi",
        "the of and to in",
        "url http://example.com/path?x=1",
        "tab\tseparated\nnewline",
        "日本語 テキスト",
        "x#y#z @a@b",
    ];
    for s in samples {
        assert_eq!(tokenize(s, &stop), reference_tokenize(s, &stop), "input {s:?}");
    }
}

#[test]
fn tokenizer_matches_reference_on_random_text() {
    let stop = Stopwords::english();
    let alphabet: Vec<char> = "abcXYZ019 #@.,!-_éÖ\t".chars().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..2000 {
        let len = rng.gen_range(0..30);
        let s: String = (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
        assert_eq!(tokenize(&s, &stop), reference_tokenize(&s, &stop), "input {s:?}");
    }
}

#[test]
fn dedupe_removes_exactly_the_conflicted_ids() {
    let mut tweets = Vec::new();
    for i in 0..100 {
        tweets.push(tweet(&format!("t{i:03}"), "u", "text", i, &format!("q{}", i % 3)));
    }
    // Ten ids reappear under a different label, five more repeat verbatim.
    for i in 0..10 {
        tweets.push(tweet(&format!("t{i:03}"), "u", "text", i, "other"));
    }
    for i in 50..55 {
        tweets.push(tweet(&format!("t{i:03}"), "u", "text", i, &format!("q{}", i % 3)));
    }
    let corpus = dedupe_multilabel(tweets).unwrap();
    assert_eq!(corpus.len(), 90);
    for i in 0..10 {
        assert!(corpus.get(&format!("t{i:03}")).is_none());
    }
    for i in 10..100 {
        assert!(corpus.get(&format!("t{i:03}")).is_some());
    }
}

#[test]
fn corpus_rejects_duplicate_ids() {
    let tweets = vec![tweet("a", "u", "x", 1, "q"), tweet("a", "v", "y", 2, "q")];
    assert!(matches!(Corpus::new(tweets), Err(Error::DuplicateId(id)) if id == "a"));
}

#[test]
fn vocabulary_matches_brute_force_counts() {
    let stop = Stopwords::english();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let tweets: Vec<_> = (0..1000)
        .map(|i| {
            let words: Vec<String> = (0..rng.gen_range(1..12))
                .map(|_| format!("w{}", rng.gen_range(0..300u32).pow(2) / 300))
                .collect();
            tweet(&format!("t{i:04}"), "u", &words.join(" "), i, "q")
        })
        .collect();
    let corpus = Corpus::new(tweets).unwrap();
    let tc = corpus.tokenize(&stop);
    let vocab = Vocabulary::from_token_lists(tc.tokens.iter().map(Vec::as_slice), 5);

    let mut counts: HashMap<&str, u64> = HashMap::new();
    for list in &tc.tokens {
        for t in list {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let expected: BTreeMap<&str, u64> = counts.into_iter().filter(|&(_, c)| c >= 5).collect();
    let actual: BTreeMap<&str, u64> = vocab
        .tokens()
        .iter()
        .map(String::as_str)
        .zip(vocab.counts().iter().copied())
        .collect();
    assert_eq!(actual, expected);
    assert_eq!(vocab.len(), expected.len());
    for (i, t) in vocab.tokens().iter().enumerate() {
        assert_eq!(vocab.index_of(t), Some(i));
    }
}

#[test]
fn split_is_chronological_and_complete() {
    let tweets: Vec<_> = (0..10)
        .map(|i| tweet(&format!("t{i}"), "u", "x", 100 - i, if i < 5 { "a" } else { "b" }))
        .collect();
    let corpus = Corpus::new(tweets).unwrap();
    let (train, test) = time_split(&corpus, 0.7).unwrap();
    assert_eq!((train.len(), test.len()), (7, 3));
    let last_train = train.tweets().last().unwrap().timestamp;
    assert!(test.tweets().iter().all(|t| t.timestamp >= last_train));
    assert_eq!(train.labels(), corpus.labels());
    assert_eq!(test.labels(), corpus.labels());
    assert!(matches!(time_split(&corpus, 1.0), Err(Error::InvalidSplit(_))));
}

#[test]
fn jsonl_round_trip_is_lossless() {
    let dir = tempfile::tempdir().unwrap();
    let mut t = tweet("t1", "alice", "Hello #World", 5, "q");
    t.hashtags = vec!["world".into()];
    t.mentions = vec!["bob".into()];
    let mut r = tweet("t2", "bob", "reply", 6, "q");
    r.reply_to = Some("t1".into());
    let corpus = Corpus::new(vec![t, r]).unwrap();
    let path = dir.path().join("c.jsonl");
    write_jsonl(&corpus, &path).unwrap();
    let back = load_jsonl(&path).unwrap();
    assert_eq!(back.tweets(), corpus.tweets());
}

#[test]
fn malformed_line_reports_its_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    let good = serde_json::to_string(&tweet("t1", "a", "x", 1, "q")).unwrap();
    std::fs::write(&path, format!("{good}\n\n{{not json\n")).unwrap();
    match load_jsonl(&path) {
        Err(Error::MalformedLine { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected malformed line, got {other:?}"),
    }
}
