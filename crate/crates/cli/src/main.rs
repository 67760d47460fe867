//! `tweetpool` command line: generate synthetic corpora, pool, train, score
//! and benchmark.
//!
//! Exit codes: 0 on success, 1 when arguments or inputs fail validation,
//! 2 when a run fails for any other reason.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use tweetpool::community::louvain;
use tweetpool::corpus::{dedupe_multilabel, load_jsonl, read_jsonl_tweets, write_jsonl, Stopwords};
use tweetpool::eval::bench::{pool_and_train, PreparedSplit};
use tweetpool::eval::{run_benchmark, score_model, BenchConfig, EvalReport};
use tweetpool::graph::build_retweet_graph;
use tweetpool::lda::{LdaConfig, TopicModel};
use tweetpool::pooling::pool;
use tweetpool::synth::{generate, SynthParams};
use tweetpool::{Corpus, Error, Scheme};

#[derive(Debug, Parser)]
#[command(name = "tweetpool", version, about = "Tweet pooling for topic models")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic corpus with planted communities and topics.
    Generate(GenerateArgs),
    /// Pool a corpus and print document statistics per scheme.
    Pool(PoolArgs),
    /// Train a topic model on the train split of one pooled corpus.
    Train(TrainArgs),
    /// Score a saved model on a corpus.
    Eval(EvalArgs),
    /// Split, pool, train and score every requested scheme.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Corpus in JSON Lines, one tweet per line.
    #[arg(long)]
    input: PathBuf,

    /// Stopword file, one word per line (default: built-in English list).
    #[arg(long)]
    stopwords: Option<PathBuf>,

    /// Drop tweet ids that appear under more than one query label.
    #[arg(long)]
    dedupe_multilabel: bool,
}

#[derive(Debug, Args)]
struct LdaArgs {
    /// Number of topics.
    #[arg(long, default_value_t = 10)]
    topics: usize,

    /// Document-topic prior (default: 50 / topics).
    #[arg(long)]
    alpha: Option<f64>,

    /// Topic-word prior.
    #[arg(long, default_value_t = 0.01)]
    beta: f64,

    /// Gibbs sweeps.
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Master seed; every random stream is derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Fraction of tweets, oldest first, used for training.
    #[arg(long, default_value_t = 0.8)]
    split: f64,

    /// Louvain resolution.
    #[arg(long, default_value_t = 1.0)]
    resolution: f64,

    /// Fold-in sweeps averaged per tweet after burn-in.
    #[arg(long, default_value_t = 20)]
    infer_sweeps: usize,

    /// Retrieved tweets per query.
    #[arg(long, default_value_t = 10)]
    retrieval_k: usize,

    /// Minimum training count for a token to enter the vocabulary.
    #[arg(long, default_value_t = 1)]
    min_count: u64,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Corpus output path.
    #[arg(long)]
    out: PathBuf,

    /// Ground-truth output path (default: next to the corpus, `.truth.json`).
    #[arg(long)]
    truth: Option<PathBuf>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value_t = 4)]
    communities: usize,

    #[arg(long, default_value_t = 25)]
    users_per_community: usize,

    /// Planted topics (default: one per community).
    #[arg(long)]
    planted_topics: Option<usize>,

    /// Topics each community tweets about (default: 2, capped at the topic count).
    #[arg(long)]
    topics_per_community: Option<usize>,

    #[arg(long, default_value_t = 120)]
    vocab_per_topic: usize,

    #[arg(long, default_value_t = 4)]
    tweets_per_user: usize,

    #[arg(long, default_value_t = 4)]
    tweet_length: usize,

    #[arg(long, default_value_t = 0.3)]
    p_in: f64,

    #[arg(long, default_value_t = 0.01)]
    p_out: f64,

    #[arg(long, default_value_t = 0.2)]
    hashtag_rate: f64,

    #[arg(long, default_value_t = 0.1)]
    reply_rate: f64,

    #[arg(long, default_value_t = 0.1)]
    mention_rate: f64,

    /// Share of words drawn from a background vocabulary common to all topics.
    #[arg(long, default_value_t = 0.0)]
    noise_rate: f64,
}

#[derive(Debug, Args)]
struct PoolArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Comma-separated schemes, or `all`.
    #[arg(long, visible_alias = "scheme", default_value = "all")]
    schemes: String,

    /// Master seed (Louvain order).
    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value_t = 1.0)]
    resolution: f64,

    /// Write the retweet graph as `u v weight` lines.
    #[arg(long)]
    export_graph: Option<PathBuf>,

    /// Write the Louvain partition as `user community` lines.
    #[arg(long)]
    export_partition: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Pooling scheme.
    #[arg(long, visible_alias = "schemes", default_value = "community")]
    scheme: Scheme,

    #[command(flatten)]
    lda: LdaArgs,

    #[command(flatten)]
    run: RunArgs,

    /// Model output path.
    #[arg(long)]
    out: PathBuf,

    /// Words printed per topic.
    #[arg(long, default_value_t = 10)]
    top_words: usize,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Model written by `train`.
    #[arg(long)]
    model: PathBuf,

    #[command(flatten)]
    run: RunArgs,

    /// Write the scores as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Comma-separated schemes, or `all`.
    #[arg(long, visible_alias = "scheme", default_value = "all")]
    schemes: String,

    #[command(flatten)]
    lda: LdaArgs,

    #[command(flatten)]
    run: RunArgs,

    /// Report output path.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Dataset name in the report (default: input file stem).
    #[arg(long)]
    dataset: Option<String>,
}

/// Bad arguments or inputs, reported with exit code 1.
#[derive(Debug)]
struct Invalid(String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn is_validation(error: &Error) -> bool {
    matches!(
        error,
        Error::MalformedLine { .. }
            | Error::DuplicateId(_)
            | Error::InvalidTweet { .. }
            | Error::EmptyCorpus
            | Error::InvalidSplit(_)
            | Error::InvalidConfig(_)
            | Error::InvalidParams(_)
            | Error::InvalidK
            | Error::UnknownScheme(_)
            | Error::ModelFormat(_)
    )
}

fn exit_code(error: &anyhow::Error) -> u8 {
    let invalid = error.chain().any(|cause| {
        cause.is::<Invalid>() || cause.downcast_ref::<Error>().is_some_and(is_validation)
    });
    if invalid {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let outcome = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Pool(args) => cmd_pool(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

impl GenerateArgs {
    fn params(&self) -> SynthParams {
        let topics = self.planted_topics.unwrap_or(self.communities);
        SynthParams {
            communities: self.communities,
            users_per_community: self.users_per_community,
            topics,
            topics_per_community: self
                .topics_per_community
                .unwrap_or_else(|| SynthParams::default().topics_per_community.min(topics.max(1))),
            vocab_per_topic: self.vocab_per_topic,
            tweets_per_user: self.tweets_per_user,
            tweet_length: self.tweet_length,
            p_retweet_in: self.p_in,
            p_retweet_out: self.p_out,
            hashtag_rate: self.hashtag_rate,
            reply_rate: self.reply_rate,
            mention_rate: self.mention_rate,
            noise_rate: self.noise_rate,
            seed: self.seed,
        }
    }

    fn truth_path(&self) -> PathBuf {
        self.truth.clone().unwrap_or_else(|| {
            let stem = self.out.file_stem().unwrap_or_default().to_string_lossy();
            self.out.with_file_name(format!("{stem}.truth.json"))
        })
    }
}

fn bench_config(lda: &LdaArgs, run: &RunArgs, dataset: String) -> Result<BenchConfig> {
    let config = BenchConfig {
        dataset,
        seed: run.seed,
        topics: lda.topics,
        alpha: lda.alpha.unwrap_or_else(|| LdaConfig::new(lda.topics.max(1)).alpha),
        beta: lda.beta,
        iterations: lda.iterations,
        split: run.split,
        resolution: run.resolution,
        infer_sweeps: run.infer_sweeps,
        retrieval_k: run.retrieval_k,
        min_count: run.min_count,
    };
    config.validate()?;
    Ok(config)
}

fn parse_schemes(list: &str) -> Result<Vec<Scheme>> {
    Ok(Scheme::parse_list(list)?)
}

fn load_input(input: &InputArgs) -> Result<(Corpus, Stopwords)> {
    let corpus = if input.dedupe_multilabel {
        let tweets = read_jsonl_tweets(&input.input)?;
        let before = tweets.len();
        let corpus = dedupe_multilabel(tweets)?;
        info!("dropped {} multi-label rows", before - corpus.len());
        corpus
    } else {
        load_jsonl(&input.input)?
    };
    let stopwords = match &input.stopwords {
        Some(path) => Stopwords::from_file(path)?,
        None => Stopwords::english(),
    };
    info!("loaded {} tweets from {}", corpus.len(), input.input.display());
    Ok((corpus, stopwords))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let params = args.params();
    params.validate()?;
    let (corpus, truth) = generate(&params)?;
    write_jsonl(&corpus, &args.out)?;
    let truth_path = args.truth_path();
    truth.write(&truth_path)?;
    println!(
        "wrote {} tweets by {} users to {} and ground truth to {}",
        corpus.len(),
        truth.user_community.len(),
        args.out.display(),
        truth_path.display()
    );
    Ok(())
}

fn cmd_pool(args: PoolArgs) -> Result<()> {
    let schemes = parse_schemes(&args.schemes)?;
    if !(args.resolution > 0.0 && args.resolution.is_finite()) {
        return Err(Invalid(format!("resolution must be positive, got {}", args.resolution)).into());
    }
    let (corpus, stopwords) = load_input(&args.input)?;
    let config = BenchConfig {
        seed: args.seed,
        resolution: args.resolution,
        ..BenchConfig::default()
    };
    let options = config.pooling_options();

    if args.export_graph.is_some() || args.export_partition.is_some() {
        let (graph, stats) = build_retweet_graph(&corpus);
        info!("retweet graph: {} users, {} edges, {} retweets", graph.node_count(), graph.edge_count(), stats.counted);
        if let Some(path) = &args.export_graph {
            graph.write_edge_list(path)?;
        }
        if let Some(path) = &args.export_partition {
            louvain(&graph, options.resolution, options.louvain_seed).write(path)?;
        }
    }

    let tokenized = corpus.tokenize(&stopwords);
    println!("{:<14} {:>8} {:>10} {:>10}", "scheme", "docs", "max_words", "mean_words");
    for scheme in schemes {
        let stats = pool(scheme, &tokenized, &options)?.stats();
        println!(
            "{:<14} {:>8} {:>10} {:>10}",
            scheme.name(),
            stats.docs,
            stats.max_words,
            stats.mean_words_rounded()
        );
    }
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let config = bench_config(&args.lda, &args.run, String::new())?;
    let (corpus, stopwords) = load_input(&args.input)?;
    let split = PreparedSplit::new(&corpus, stopwords, config.split)?;
    let (pooled, model, seconds) = pool_and_train(&split, args.scheme, &config)?;
    model.save(&args.out)?;
    let stats = pooled.stats();
    println!(
        "{} pooling: {} documents, {} topics, {:.2} s; model written to {}",
        args.scheme,
        stats.docs,
        model.topics(),
        seconds,
        args.out.display()
    );
    for topic in 0..model.topics() {
        let words: Vec<String> = model
            .top_words(topic, args.top_words)?
            .into_iter()
            .map(|(w, _)| w)
            .collect();
        println!("topic {topic:>2}: {}", words.join(" "));
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let model = TopicModel::load(&args.model)?;
    let lda = LdaArgs {
        topics: model.config().topics,
        alpha: Some(model.config().alpha),
        beta: model.config().beta,
        iterations: model.config().iterations,
    };
    let config = bench_config(&lda, &args.run, String::new())?;
    let (corpus, stopwords) = load_input(&args.input)?;
    let split = PreparedSplit::new(&corpus, stopwords, config.split)?;
    let scores = score_model(&split, &model, &config)?;
    println!("purity          {:.4}", scores.purity);
    println!("NMI             {:.4}", scores.nmi);
    println!("classification  {:.4}", scores.classification_f1);
    println!("retrieval       {:.4}", scores.retrieval_f1);
    println!("precision@{:<4}  {:.4}", config.retrieval_k, scores.retrieval_precision);
    if let Some(path) = &args.out {
        write_text(path, &(serde_json::to_string_pretty(&scores)? + "\n"))?;
    }
    Ok(())
}

fn print_report(report: &EvalReport) {
    println!(
        "{:<14} {:>7} {:>7} {:>14} {:>9} {:>8} {:>7} {:>9} {:>10}",
        "scheme", "purity", "NMI", "classification", "retrieval", "time_s", "docs", "max_words", "mean_words"
    );
    for r in &report.schemes {
        println!(
            "{:<14} {:>7.3} {:>7.3} {:>14.3} {:>9.3} {:>8.2} {:>7} {:>9} {:>10}",
            r.scheme.name(),
            r.purity,
            r.nmi,
            r.classification_f1,
            r.retrieval_f1,
            r.running_time_s,
            r.docs,
            r.max_words,
            r.mean_words
        );
    }
    for f in &report.failures {
        println!("{:<14} failed: {}", f.scheme.name(), f.error);
    }
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let schemes = parse_schemes(&args.schemes)?;
    let dataset = args.dataset.clone().unwrap_or_else(|| {
        args.input
            .input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "corpus".into())
    });
    let config = bench_config(&args.lda, &args.run, dataset)?;
    let (corpus, stopwords) = load_input(&args.input)?;
    let report = run_benchmark(&corpus, &schemes, stopwords, &config)?;
    if let Some(path) = &args.out {
        write_text(path, &report.to_json()?)?;
    }
    print_report(&report);
    if !report.failures.is_empty() {
        anyhow::bail!("{} of {} schemes failed", report.failures.len(), schemes.len());
    }
    Ok(())
}
