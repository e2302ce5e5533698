//! `lmstats`: corpus statistics, law fits and distribution tests from the
//! command line.
//!
//! Exit status: 0 on success, 1 for usage errors, 2 for data errors and 3
//! for numerical failures.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lmstats::corpus::load_corpus;
use lmstats::lm::{generate_corpus, SamplerConfig, Scheme, TrigramModel};
use lmstats::report::{self, AnalyzeConfig, CompareConfig};
use lmstats::stats::NgramOrder;
use lmstats::{Error, ErrorKind, IngestOptions, StopwordSet};

#[derive(Parser)]
#[command(name = "lmstats", version, about = "Statistical tendencies of text corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Describe one corpus: summary means, rank-frequency, type-token curves, fits.
    Analyze(AnalyzeArgs),
    /// Compare a candidate corpus against a reference corpus.
    Compare(CompareArgs),
    /// Generate documents from a trigram model.
    Sample(SampleArgs),
    /// Train a trigram model and save it as JSON.
    Train(TrainArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Input is already tokenized; split on whitespace only.
    #[arg(long, env = "LMSTATS_PRETOKENIZED")]
    pretokenized: bool,

    /// Keep blank lines as empty documents.
    #[arg(long, env = "LMSTATS_KEEP_EMPTY")]
    keep_empty: bool,

    /// Do not lowercase tokens.
    #[arg(long, env = "LMSTATS_KEEP_CASE")]
    keep_case: bool,
}

impl IngestArgs {
    fn options(&self) -> IngestOptions {
        IngestOptions {
            lowercase: !self.keep_case,
            pretokenized: self.pretokenized,
            keep_empty: self.keep_empty,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Format written to stdout (or --output) when --out-dir is not given.
    #[arg(long, value_enum, default_value = "json", env = "LMSTATS_FORMAT")]
    format: Format,

    /// Write the primary output to this file instead of stdout.
    #[arg(long, env = "LMSTATS_OUTPUT")]
    output: Option<PathBuf>,

    /// Write report.json and every CSV side file into this directory.
    #[arg(long, env = "LMSTATS_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Corpus file, one document per line.
    #[arg(long, env = "LMSTATS_INPUT")]
    input: PathBuf,

    /// Stopword list, one word per line (default: built-in English list).
    #[arg(long, env = "LMSTATS_STOPWORDS")]
    stopwords: Option<PathBuf>,

    #[arg(long, default_value_t = 10_000, env = "LMSTATS_MAX_RANK")]
    max_rank: usize,

    /// Bootstrap replicates for standard deviations of the summary means.
    #[arg(long, default_value_t = 0, env = "LMSTATS_BOOTSTRAP")]
    bootstrap: usize,

    #[arg(long, default_value_t = 0, env = "LMSTATS_SEED")]
    seed: u64,

    #[command(flatten)]
    ingest: IngestArgs,

    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// Candidate corpus (e.g. model samples).
    #[arg(long, env = "LMSTATS_INPUT")]
    input: PathBuf,

    /// Reference corpus (e.g. a held-out test set).
    #[arg(long, env = "LMSTATS_REFERENCE")]
    reference: PathBuf,

    #[arg(long, env = "LMSTATS_STOPWORDS")]
    stopwords: Option<PathBuf>,

    #[arg(long, default_value_t = 10_000, env = "LMSTATS_MAX_RANK")]
    max_rank: usize,

    /// Type unit for the type-token comparison.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2), env = "LMSTATS_NGRAM_ORDER")]
    ngram_order: u8,

    /// Monte-Carlo and permutation iterations per test.
    #[arg(long, default_value_t = 1_000, env = "LMSTATS_MC_ITERS")]
    mc_iters: usize,

    /// Minimum documents per side for a type-token length bucket.
    #[arg(long, default_value_t = 30, env = "LMSTATS_MIN_BUCKET")]
    min_bucket: usize,

    /// Enumerate every split in mean-difference tests up to this many splits.
    #[arg(long, default_value_t = 100_000, env = "LMSTATS_EXHAUSTIVE_THRESHOLD")]
    exhaustive_threshold: u64,

    #[arg(long, default_value_t = 0, env = "LMSTATS_SEED")]
    seed: u64,

    #[command(flatten)]
    ingest: IngestArgs,

    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Random,
    Nucleus,
    Beam,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Random => Scheme::Random,
            SchemeArg::Nucleus => Scheme::Nucleus,
            SchemeArg::Beam => Scheme::Beam,
        }
    }
}

#[derive(Args)]
struct SampleArgs {
    /// Trained model file written by `lmstats train`.
    #[arg(
        long,
        env = "LMSTATS_MODEL",
        conflicts_with = "train_from",
        required_unless_present = "train_from"
    )]
    model: Option<PathBuf>,

    /// Train a model on this corpus first.
    #[arg(long, env = "LMSTATS_TRAIN_FROM")]
    train_from: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "random", env = "LMSTATS_SCHEME")]
    scheme: SchemeArg,

    #[arg(long, default_value_t = 0.95, env = "LMSTATS_NUCLEUS_MASS")]
    nucleus_mass: f64,

    #[arg(long, default_value_t = 5, env = "LMSTATS_BEAM_SIZE")]
    beam_size: usize,

    #[arg(long, default_value_t = 1024, env = "LMSTATS_MAX_LEN")]
    max_len: usize,

    /// Number of documents to generate.
    #[arg(long, env = "LMSTATS_N")]
    n: usize,

    #[arg(long, default_value_t = 0, env = "LMSTATS_SEED")]
    seed: u64,

    /// Output corpus file (default: stdout).
    #[arg(long, env = "LMSTATS_OUTPUT")]
    output: Option<PathBuf>,

    #[command(flatten)]
    ingest: IngestArgs,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, env = "LMSTATS_INPUT")]
    input: PathBuf,

    /// Model file to write.
    #[arg(long, env = "LMSTATS_OUTPUT")]
    output: PathBuf,

    #[command(flatten)]
    ingest: IngestArgs,
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Error> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, contents: &str) -> Result<(), Error> {
    match out {
        Some(path) => write_atomic(path, contents),
        None => io::stdout()
            .write_all(contents.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn write_bundle(dir: &Path, report_json: &str, files: &[(String, String)]) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_atomic(&dir.join("report.json"), report_json)?;
    for (name, contents) in files {
        write_atomic(&dir.join(name), contents)?;
    }
    Ok(())
}

fn stopword_set(path: &Option<PathBuf>) -> Result<(StopwordSet, String), Error> {
    match path {
        Some(p) => Ok((StopwordSet::from_file(p)?, p.display().to_string())),
        None => Ok((StopwordSet::english(), "english".into())),
    }
}

fn analyze(args: AnalyzeArgs) -> Result<(), Error> {
    let (stopwords, label) = stopword_set(&args.stopwords)?;
    let config = AnalyzeConfig {
        ingest: args.ingest.options(),
        stopwords: label,
        max_rank: args.max_rank,
        bootstrap: args.bootstrap,
        seed: args.seed,
        ..AnalyzeConfig::default()
    };
    let corpus = load_corpus(&args.input, &config.ingest)?;
    let out = report::analyze(&corpus, &stopwords, &config)?;
    let json = report::to_json(&out.report)?;
    if let Some(dir) = &args.out.out_dir {
        return write_bundle(dir, &json, &out.files);
    }
    match args.out.format {
        Format::Json => emit(args.out.output.as_deref(), &json),
        Format::Csv => emit(args.out.output.as_deref(), &out.files[0].1),
    }
}

fn compare(args: CompareArgs) -> Result<(), Error> {
    let (stopwords, label) = stopword_set(&args.stopwords)?;
    let config = CompareConfig {
        ingest: args.ingest.options(),
        stopwords: label,
        max_rank: args.max_rank,
        ngram_order: NgramOrder::from_usize(args.ngram_order.into())?,
        mc_iters: args.mc_iters,
        exhaustive_threshold: args.exhaustive_threshold,
        min_bucket: args.min_bucket,
        seed: args.seed,
        ..CompareConfig::default()
    };
    let candidate = load_corpus(&args.input, &config.ingest)?;
    let reference = load_corpus(&args.reference, &config.ingest)?;
    let out = report::compare(&candidate, &reference, &stopwords, &config)?;
    let json = report::to_json(&out.report)?;
    if let Some(dir) = &args.out.out_dir {
        return write_bundle(dir, &json, &out.files);
    }
    match args.out.format {
        Format::Json => emit(args.out.output.as_deref(), &json),
        Format::Csv => emit(args.out.output.as_deref(), &out.report.tests_csv()),
    }
}

fn sample(args: SampleArgs) -> Result<(), Error> {
    let config = SamplerConfig {
        scheme: args.scheme.into(),
        nucleus_mass: args.nucleus_mass,
        beam_size: args.beam_size,
        max_length: args.max_len,
        seed: args.seed,
    };
    config.validate()?;
    let model = match (&args.model, &args.train_from) {
        (Some(path), _) => TrigramModel::load(path)?,
        (None, Some(path)) => TrigramModel::train(&load_corpus(path, &args.ingest.options())?)?,
        (None, None) => unreachable!("clap requires one of --model or --train-from"),
    };
    let generated = generate_corpus(&model, &config, args.n)?;
    emit(args.output.as_deref(), &generated.corpus.to_text())?;
    eprintln!(
        "generated {} documents: scheme={} nucleus_mass={} beam_size={} max_len={} seed={} truncated={}",
        args.n,
        args.scheme
            .to_possible_value()
            .map(|v| v.get_name().to_owned())
            .unwrap_or_default(),
        config.nucleus_mass,
        config.beam_size,
        config.max_length,
        config.seed,
        generated.truncated,
    );
    Ok(())
}

fn train(args: TrainArgs) -> Result<(), Error> {
    let corpus = load_corpus(&args.input, &args.ingest.options())?;
    let model = TrigramModel::train(&corpus)?;
    write_atomic(&args.output, &model.to_json()?)?;
    eprintln!(
        "trained on {} documents: {} words, {} contexts",
        corpus.len(),
        model.vocabulary_size(),
        model.context_count()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Compare(a) => compare(a),
        Command::Sample(a) => sample(a),
        Command::Train(a) => train(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lmstats: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Data => 2,
                ErrorKind::Numerical => 3,
            })
        }
    }
}
