//! Tweet pooling for LDA topic modeling.
//!
//! Short posts carry too little word co-occurrence for LDA to find coherent
//! topics. Pooling aggregates tweets into longer training documents. This
//! crate implements six pooling schemes (unpooled, author, hashtag,
//! conversation, network-based, and community pooling over the weighted
//! retweet graph), a collapsed Gibbs LDA trainer with per-tweet fold-in
//! inference, and an evaluation harness: purity, NMI, naive Bayes
//! classification F1, top-k retrieval F1 and wall-clock timing.
//!
//! The [`synth`] module generates labeled corpora with planted communities
//! and topics so every stage can be checked against known ground truth.

pub mod community;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod graph;
pub mod lda;
pub mod pooling;
pub mod seed;
pub mod synth;

pub use community::{louvain, modularity, Partition};
pub use corpus::{Corpus, TokenizedCorpus, Tweet, Vocabulary};
pub use error::{Error, Result};
pub use graph::WeightedGraph;
pub use lda::{LdaConfig, TopicModel};
pub use pooling::{PooledCorpus, Scheme};
