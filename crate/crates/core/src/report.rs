//! End-to-end analyses that produce a JSON report plus CSV side files.
//!
//! [`analyze`] describes one corpus. [`compare`] runs the full battery of
//! distances and tests of a candidate corpus against a reference corpus.
//! Reports contain no timestamps or host details, so identical inputs and
//! configuration give byte-identical output.

use serde::{Deserialize, Serialize};

use crate::corpus::{vocabulary, Corpus, IngestOptions, StopwordSet};
use crate::error::{Error, Result};
use crate::fit::{fit_heaps_mle, fit_zipf_mle, zipf_cdf, FitRecord, HeapsFit};
use crate::hypothesis::{
    ks_by_length, ks_one_sample, ks_two_sample, length_ks_to_csv, mean_diff_permutation_test, tvd_permutation_test,
    Histogram, KsResult, LengthKs, LengthKsOptions, LengthReference, PermutationResult, ReferenceKind, TvdResult,
    DEFAULT_EXHAUSTIVE_THRESHOLD, DEFAULT_MC_ITERATIONS, DEFAULT_MIN_BUCKET,
};
use crate::rng::derive_seed;
use crate::stats::{
    curve_to_csv, fraction_distribution, length_counts, rank_frequency, summary_stats, summary_stats_bootstrap,
    type_token_curve, type_token_observations, FractionClass, NgramOrder, ObservationMode, RankFrequencyTable,
    SummaryStats, DEFAULT_MAX_RANK,
};

pub const TOOL_NAME: &str = "lmstats";

/// Tool identity, the command that ran and its full configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
}

impl Metadata {
    fn new(command: &str, seed: u64, config: &impl Serialize) -> Result<Self> {
        Ok(Metadata {
            tool: TOOL_NAME.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config: serde_json::to_value(config)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusInfo {
    pub source: String,
    pub documents: usize,
    pub tokens: u64,
    pub types: usize,
}

impl CorpusInfo {
    fn of(corpus: &Corpus) -> Self {
        CorpusInfo {
            source: corpus.source_label().to_owned(),
            documents: corpus.len(),
            tokens: corpus.total_tokens(),
            types: vocabulary(corpus).len(),
        }
    }
}

/// A report together with the CSV files it refers to, as `(name, contents)`.
#[derive(Debug, Clone)]
pub struct Output<R> {
    pub report: R,
    pub files: Vec<(String, String)>,
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<R: Serialize>(report: &R) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

fn section<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_section(name))
}

/// A Heaps fit, or `None` when the data cannot identify both parameters.
fn try_heaps(
    corpus: &Corpus,
    order: NgramOrder,
    mode: ObservationMode,
    notes: &mut Vec<String>,
) -> Result<Option<HeapsFit>> {
    let obs = type_token_observations(corpus, order, mode);
    match fit_heaps_mle(&obs) {
        Ok(fit) => Ok(Some(fit)),
        Err(Error::Underdetermined(why)) => {
            notes.push(format!(
                "{}: order-{} Heaps fit skipped ({why})",
                corpus.source_label(),
                order.as_usize()
            ));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeConfig {
    pub ingest: IngestOptions,
    /// `"english"` for the built-in list, otherwise the file given.
    pub stopwords: String,
    pub max_rank: usize,
    pub heaps_observations: ObservationMode,
    /// Bootstrap replicates for the spread of the summary means; 0 disables.
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            ingest: IngestOptions::default(),
            stopwords: "english".into(),
            max_rank: DEFAULT_MAX_RANK,
            heaps_observations: ObservationMode::Terminal,
            bootstrap: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub metadata: Metadata,
    pub corpus: CorpusInfo,
    pub summary: SummaryStats,
    pub zipf: FitRecord,
    pub heaps_unigram: Option<FitRecord>,
    pub heaps_bigram: Option<FitRecord>,
    pub files: Vec<String>,
    pub notes: Vec<String>,
}

pub const RANK_FREQUENCY_CSV: &str = "rank_frequency.csv";
pub const TYPE_TOKEN_UNIGRAM_CSV: &str = "type_token_unigram.csv";
pub const TYPE_TOKEN_BIGRAM_CSV: &str = "type_token_bigram.csv";
pub const LENGTH_CSV: &str = "length_distribution.csv";
pub const FRACTIONS_CSV: &str = "fractions.csv";
pub const TESTS_CSV: &str = "tests.csv";

fn length_csv(corpus: &Corpus) -> String {
    let counts = length_counts(corpus);
    let n = corpus.len() as f64;
    let mut out = String::from("length,count,probability\n");
    for (l, c) in counts {
        out.push_str(&format!("{l},{c},{}\n", c as f64 / n));
    }
    out
}

/// Per-document stopword and symbol fractions (non-empty documents only).
fn fractions_csv(corpus: &Corpus, stopwords: &StopwordSet) -> Result<String> {
    let stop = fraction_distribution(corpus, FractionClass::Stopword, stopwords)?;
    let sym = fraction_distribution(corpus, FractionClass::Symbol, stopwords)?;
    let mut out = String::from("document,stopword,symbol\n");
    let non_empty = corpus.documents().iter().enumerate().filter(|(_, d)| !d.is_empty());
    for ((i, _), (a, b)) in non_empty.zip(stop.values.iter().zip(&sym.values)) {
        out.push_str(&format!("{},{a},{b}\n", i + 1));
    }
    Ok(out)
}

/// Summary statistics, rank-frequency table, type-token curves, length and
/// fraction distributions, and Zipf and Heaps fits for one corpus.
pub fn analyze(corpus: &Corpus, stopwords: &StopwordSet, config: &AnalyzeConfig) -> Result<Output<AnalysisReport>> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let summary = section(
        "summary",
        match config.bootstrap {
            0 => summary_stats(corpus, stopwords),
            b => summary_stats_bootstrap(corpus, stopwords, b, derive_seed(config.seed, 1)),
        },
    )?;
    let table = section("rank_frequency", rank_frequency(corpus, config.max_rank))?;
    let zipf = section("zipf", fit_zipf_mle(&table))?;
    let mut notes = Vec::new();
    let heaps_unigram = section(
        "heaps",
        try_heaps(corpus, NgramOrder::Unigram, config.heaps_observations, &mut notes),
    )?;
    let heaps_bigram = section(
        "heaps",
        try_heaps(corpus, NgramOrder::Bigram, config.heaps_observations, &mut notes),
    )?;
    let files = vec![
        (RANK_FREQUENCY_CSV.to_owned(), table.to_csv()),
        (
            TYPE_TOKEN_UNIGRAM_CSV.to_owned(),
            curve_to_csv(&type_token_curve(corpus, NgramOrder::Unigram)),
        ),
        (
            TYPE_TOKEN_BIGRAM_CSV.to_owned(),
            curve_to_csv(&type_token_curve(corpus, NgramOrder::Bigram)),
        ),
        (LENGTH_CSV.to_owned(), length_csv(corpus)),
        (
            FRACTIONS_CSV.to_owned(),
            section("fractions", fractions_csv(corpus, stopwords))?,
        ),
    ];
    let report = AnalysisReport {
        metadata: Metadata::new("analyze", config.seed, config)?,
        corpus: CorpusInfo::of(corpus),
        summary,
        zipf: FitRecord::from(&zipf),
        heaps_unigram: heaps_unigram.as_ref().map(FitRecord::from),
        heaps_bigram: heaps_bigram.as_ref().map(FitRecord::from),
        files: files.iter().map(|f| f.0.clone()).collect(),
        notes,
    };
    Ok(Output { report, files })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub ingest: IngestOptions,
    pub stopwords: String,
    pub max_rank: usize,
    pub ngram_order: NgramOrder,
    pub heaps_observations: ObservationMode,
    pub mc_iters: usize,
    pub exhaustive_threshold: u64,
    pub length_grid: Vec<u64>,
    pub min_bucket: usize,
    pub seed: u64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            ingest: IngestOptions::default(),
            stopwords: "english".into(),
            max_rank: DEFAULT_MAX_RANK,
            ngram_order: NgramOrder::Unigram,
            heaps_observations: ObservationMode::Terminal,
            mc_iters: DEFAULT_MC_ITERATIONS,
            exhaustive_threshold: DEFAULT_EXHAUSTIVE_THRESHOLD,
            length_grid: crate::hypothesis::default_length_grid(),
            min_bucket: DEFAULT_MIN_BUCKET,
            seed: 0,
        }
    }
}

/// One line of the flat test table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRow {
    pub test: String,
    pub variant: String,
    pub statistic: f64,
    pub p_value: f64,
    pub iters: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankFrequencySection {
    pub zipf_candidate: FitRecord,
    pub zipf_reference: FitRecord,
    #[serde(rename = "D_ptheta")]
    pub d_ptheta: KsResult,
    #[serde(rename = "D_phat")]
    pub d_phat: KsResult,
    #[serde(rename = "D_p")]
    pub d_p: KsResult,
}

/// A per-document quantity compared by KS and by a mean-difference test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSection {
    pub mean_candidate: f64,
    pub mean_reference: f64,
    #[serde(rename = "D_p")]
    pub d_p: KsResult,
    pub mean_difference: PermutationResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeTokenSection {
    pub order: NgramOrder,
    pub heaps_candidate: Option<FitRecord>,
    pub heaps_reference: Option<FitRecord>,
    #[serde(rename = "D_ptheta")]
    pub d_ptheta: Vec<LengthKs>,
    #[serde(rename = "D_phat")]
    pub d_phat: Vec<LengthKs>,
    #[serde(rename = "D_p")]
    pub d_p: Vec<LengthKs>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub metadata: Metadata,
    pub candidate: CorpusInfo,
    pub reference: CorpusInfo,
    pub summary_candidate: SummaryStats,
    pub summary_reference: SummaryStats,
    pub rank_frequency: RankFrequencySection,
    pub unigram: TvdResult,
    pub length: DistributionSection,
    pub stopword: DistributionSection,
    pub symbol: DistributionSection,
    pub type_token: TypeTokenSection,
    pub tests: Vec<TestRow>,
    pub files: Vec<String>,
    pub notes: Vec<String>,
}

impl ComparisonReport {
    /// Rows of the flat test table as CSV.
    pub fn tests_csv(&self) -> String {
        let mut out = String::from("test,variant,statistic,p_value,iters,seed\n");
        for r in &self.tests {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.test, r.variant, r.statistic, r.p_value, r.iters, r.seed
            ));
        }
        out
    }
}

// Sub-job labels for seed derivation; fixed so reports stay reproducible.
const SEED_RANK_PTHETA: u64 = 1;
const SEED_RANK_PHAT: u64 = 2;
const SEED_RANK_P: u64 = 3;
const SEED_UNIGRAM: u64 = 4;
const SEED_LENGTH: u64 = 5;
const SEED_STOPWORD: u64 = 7;
const SEED_SYMBOL: u64 = 9;
const SEED_TT_PTHETA: u64 = 11;
const SEED_TT_PHAT: u64 = 12;
const SEED_TT_P: u64 = 13;

fn distribution_section(
    candidate: &[f64],
    reference: &[f64],
    config: &CompareConfig,
    label: u64,
) -> Result<DistributionSection> {
    let d_p = ks_two_sample(
        &Histogram::from_sample(candidate)?,
        &Histogram::from_sample(reference)?,
        config.mc_iters,
        derive_seed(config.seed, label),
    )?;
    let mean_difference = mean_diff_permutation_test(
        candidate,
        reference,
        config.mc_iters,
        derive_seed(config.seed, label + 1),
        config.exhaustive_threshold,
    )?;
    Ok(DistributionSection {
        mean_candidate: crate::stats::mean(candidate),
        mean_reference: crate::stats::mean(reference),
        d_p,
        mean_difference,
    })
}

fn rank_section(
    cand: &RankFrequencyTable,
    refr: &RankFrequencyTable,
    config: &CompareConfig,
) -> Result<RankFrequencySection> {
    let fit_c = fit_zipf_mle(cand)?;
    let fit_r = fit_zipf_mle(refr)?;
    let sample = Histogram::from_ranks(cand)?;
    let seed = |label| derive_seed(config.seed, label);
    Ok(RankFrequencySection {
        zipf_candidate: FitRecord::from(&fit_c),
        zipf_reference: FitRecord::from(&fit_r),
        d_ptheta: ks_one_sample(&sample, &zipf_cdf(&fit_c), config.mc_iters, seed(SEED_RANK_PTHETA))?
            .labelled(ReferenceKind::ModelFit),
        d_phat: ks_one_sample(&sample, &zipf_cdf(&fit_r), config.mc_iters, seed(SEED_RANK_PHAT))?
            .labelled(ReferenceKind::ReferenceFit),
        d_p: ks_two_sample(
            &sample,
            &Histogram::from_ranks(refr)?,
            config.mc_iters,
            seed(SEED_RANK_P),
        )?,
    })
}

fn ks_row(test: &str, r: &KsResult) -> TestRow {
    let variant = serde_json::to_value(r.reference)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    TestRow {
        test: test.into(),
        variant,
        statistic: r.statistic,
        p_value: r.p_value,
        iters: r.mc_iterations as u64,
        seed: r.seed,
    }
}

fn perm_row(test: &str, r: &PermutationResult) -> TestRow {
    TestRow {
        test: test.into(),
        variant: if r.exhaustive { "exhaustive" } else { "monte_carlo" }.into(),
        statistic: r.statistic,
        p_value: r.p_value,
        iters: r.permutations,
        seed: r.seed,
    }
}

/// The per-document fraction values of one class.
fn fractions(corpus: &Corpus, class: FractionClass, stopwords: &StopwordSet) -> Result<Vec<f64>> {
    Ok(fraction_distribution(corpus, class, stopwords)?.values)
}

/// Compares a candidate corpus with a reference corpus on every statistic.
pub fn compare(
    candidate: &Corpus,
    reference: &Corpus,
    stopwords: &StopwordSet,
    config: &CompareConfig,
) -> Result<Output<ComparisonReport>> {
    for c in [candidate, reference] {
        if c.is_empty() {
            return Err(Error::EmptyCorpus);
        }
    }
    let summary_candidate = section("summary", summary_stats(candidate, stopwords))?;
    let summary_reference = section("summary", summary_stats(reference, stopwords))?;

    let rank_frequency = section("rank_frequency", {
        let cand = rank_frequency(candidate, config.max_rank)?;
        let refr = rank_frequency(reference, config.max_rank)?;
        rank_section(&cand, &refr, config)
    })?;

    let unigram = section(
        "unigram",
        tvd_permutation_test(
            vocabulary(candidate).entries(),
            vocabulary(reference).entries(),
            config.mc_iters,
            derive_seed(config.seed, SEED_UNIGRAM),
        ),
    )?;

    let lengths = |c: &Corpus| c.documents().iter().map(|d| d.len() as f64).collect::<Vec<_>>();
    let length = section(
        "length",
        distribution_section(&lengths(candidate), &lengths(reference), config, SEED_LENGTH),
    )?;
    let stopword = section("stopword", {
        let a = fractions(candidate, FractionClass::Stopword, stopwords)?;
        let b = fractions(reference, FractionClass::Stopword, stopwords)?;
        distribution_section(&a, &b, config, SEED_STOPWORD)
    })?;
    let symbol = section("symbol", {
        let a = fractions(candidate, FractionClass::Symbol, stopwords)?;
        let b = fractions(reference, FractionClass::Symbol, stopwords)?;
        distribution_section(&a, &b, config, SEED_SYMBOL)
    })?;

    let mut notes = Vec::new();
    let type_token = section("type_token", {
        let order = config.ngram_order;
        let heaps_c = try_heaps(candidate, order, config.heaps_observations, &mut notes)?;
        let heaps_r = try_heaps(reference, order, config.heaps_observations, &mut notes)?;
        let cand_obs = type_token_observations(candidate, order, ObservationMode::Prefix);
        let ref_obs = type_token_observations(reference, order, ObservationMode::Prefix);
        let options = |label| LengthKsOptions {
            grid: config.length_grid.clone(),
            min_bucket: config.min_bucket,
            mc_iters: config.mc_iters,
            seed: derive_seed(config.seed, label),
        };
        let against_fit = |fit: &Option<HeapsFit>, kind, label| -> Result<Vec<LengthKs>> {
            match fit {
                Some(f) => ks_by_length(&cand_obs, LengthReference::Fit(f, kind), &options(label)),
                None => Ok(Vec::new()),
            }
        };
        Ok::<_, Error>(TypeTokenSection {
            order,
            d_ptheta: against_fit(&heaps_c, ReferenceKind::ModelFit, SEED_TT_PTHETA)?,
            d_phat: against_fit(&heaps_r, ReferenceKind::ReferenceFit, SEED_TT_PHAT)?,
            d_p: ks_by_length(&cand_obs, LengthReference::Empirical(&ref_obs), &options(SEED_TT_P))?,
            heaps_candidate: heaps_c.as_ref().map(FitRecord::from),
            heaps_reference: heaps_r.as_ref().map(FitRecord::from),
        })
    })?;

    let mut tests = vec![
        ks_row("rank_frequency", &rank_frequency.d_ptheta),
        ks_row("rank_frequency", &rank_frequency.d_phat),
        ks_row("rank_frequency", &rank_frequency.d_p),
        TestRow {
            test: "unigram_tvd".into(),
            variant: "sup".into(),
            statistic: unigram.tvd_sup,
            p_value: unigram.p_value,
            iters: unigram.iterations as u64,
            seed: unigram.seed,
        },
        TestRow {
            test: "unigram_tvd".into(),
            variant: "half_l1".into(),
            statistic: unigram.tvd_l1_half,
            p_value: unigram.p_value_l1_half,
            iters: unigram.iterations as u64,
            seed: unigram.seed,
        },
    ];
    for (name, s) in [("length", &length), ("stopword", &stopword), ("symbol", &symbol)] {
        tests.push(ks_row(name, &s.d_p));
        tests.push(perm_row(&format!("{name}_mean_difference"), &s.mean_difference));
    }
    for rows in [&type_token.d_ptheta, &type_token.d_phat, &type_token.d_p] {
        for r in rows {
            if let Some(k) = &r.result {
                tests.push(ks_row(&format!("type_token_t{}", r.t), k));
            }
        }
    }

    let files = vec![
        (TESTS_CSV.to_owned(), String::new()),
        (
            "type_token_ks_D_ptheta.csv".to_owned(),
            length_ks_to_csv(&type_token.d_ptheta),
        ),
        (
            "type_token_ks_D_phat.csv".to_owned(),
            length_ks_to_csv(&type_token.d_phat),
        ),
        ("type_token_ks_D_p.csv".to_owned(), length_ks_to_csv(&type_token.d_p)),
    ];
    let mut report = ComparisonReport {
        metadata: Metadata::new("compare", config.seed, config)?,
        candidate: CorpusInfo::of(candidate),
        reference: CorpusInfo::of(reference),
        summary_candidate,
        summary_reference,
        rank_frequency,
        unigram,
        length,
        stopword,
        symbol,
        type_token,
        tests,
        files: files.iter().map(|f| f.0.clone()).collect(),
        notes,
    };
    report.notes.sort();
    let mut files = files;
    files[0].1 = report.tests_csv();
    Ok(Output { report, files })
}

/// Every statistic in `tests` whose test compares the two corpora directly
/// (as opposed to goodness of fit to a parametric law).
pub fn comparative_rows(report: &ComparisonReport) -> Vec<&TestRow> {
    report
        .tests
        .iter()
        .filter(|r| r.variant != "D_ptheta" && r.variant != "D_phat")
        .collect()
}
