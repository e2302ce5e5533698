//! Empirical distributions over a corpus: rank-frequency, unigram, length,
//! stopword/symbol fractions and type-token growth.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{classify_token, vocabulary, Corpus, Document, StopwordSet, TokenClass, Vocabulary};
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use rand::Rng;

/// Default truncation used for rank-frequency analyses.
pub const DEFAULT_MAX_RANK: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankRow {
    pub rank: usize,
    pub word: String,
    pub count: u64,
}

/// Words ordered by decreasing count; equal counts are ordered
/// lexicographically so the table is identical across runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankFrequencyTable {
    rows: Vec<RankRow>,
    total: u64,
}

impl RankFrequencyTable {
    pub fn from_vocabulary(vocab: &Vocabulary, max_rank: usize) -> Result<Self> {
        if max_rank == 0 {
            return Err(Error::InvalidParameter("max_rank must be at least 1".into()));
        }
        if vocab.is_empty() {
            return Err(Error::EmptyTable);
        }
        let mut pairs: Vec<(&String, u64)> = vocab.entries().iter().map(|(w, &c)| (w, c)).collect();
        pairs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        pairs.truncate(max_rank);
        let rows: Vec<RankRow> = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (w, c))| RankRow {
                rank: i + 1,
                word: w.clone(),
                count: c,
            })
            .collect();
        let total = rows.iter().map(|r| r.count).sum();
        Ok(RankFrequencyTable { rows, total })
    }

    /// Builds a table directly from counts already in rank order.
    pub fn from_ranked_counts(counts: &[u64]) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyTable);
        }
        if counts.contains(&0) || counts.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "ranked counts must be positive and non-increasing".into(),
            ));
        }
        let rows = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| RankRow {
                rank: i + 1,
                word: format!("w{}", i + 1),
                count: c,
            })
            .collect();
        Ok(RankFrequencyTable {
            rows,
            total: counts.iter().sum(),
        })
    }

    pub fn rows(&self) -> &[RankRow] {
        &self.rows
    }

    /// Sum of counts over the included ranks.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of ranks kept (the truncation point K).
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn counts(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.count).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,word,count\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.rank, csv_field(&r.word), r.count));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

pub fn rank_frequency(corpus: &Corpus, max_rank: usize) -> Result<RankFrequencyTable> {
    RankFrequencyTable::from_vocabulary(&vocabulary(corpus), max_rank)
}

/// A probability mass function over an ordered support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePmf<K> {
    support: Vec<K>,
    probs: Vec<f64>,
}

impl<K: Ord + Clone> DiscretePmf<K> {
    pub fn from_counts(counts: &BTreeMap<K, u64>) -> Result<Self> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(Error::EmptySample);
        }
        let (support, probs) = counts
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (k.clone(), c as f64 / total as f64))
            .unzip();
        Ok(DiscretePmf { support, probs })
    }

    /// Normalizes arbitrary non-negative weights.
    pub fn from_weights(pairs: impl IntoIterator<Item = (K, f64)>) -> Result<Self> {
        let mut map: BTreeMap<K, f64> = BTreeMap::new();
        for (k, w) in pairs {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!("invalid weight {w}")));
            }
            *map.entry(k).or_default() += w;
        }
        let total: f64 = map.values().sum();
        if total <= 0.0 {
            return Err(Error::EmptySample);
        }
        let (support, probs) = map.into_iter().map(|(k, w)| (k, w / total)).unzip();
        Ok(DiscretePmf { support, probs })
    }

    pub fn support(&self) -> &[K] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, key: &K) -> f64 {
        self.support.binary_search(key).map(|i| self.probs[i]).unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, f64)> {
        self.support.iter().zip(self.probs.iter().copied())
    }
}

/// Empirical unigram distribution: count(w) / total tokens.
pub fn unigram_pmf(corpus: &Corpus) -> Result<DiscretePmf<String>> {
    let vocab = vocabulary(corpus);
    if vocab.total_tokens() == 0 {
        return Err(Error::EmptyCorpus);
    }
    DiscretePmf::from_counts(vocab.entries())
}

pub fn length_counts(corpus: &Corpus) -> BTreeMap<usize, u64> {
    let mut counts = BTreeMap::new();
    for d in corpus.documents() {
        *counts.entry(d.len()).or_default() += 1;
    }
    counts
}

/// Empirical distribution of document lengths.
pub fn length_distribution(corpus: &Corpus) -> Result<DiscretePmf<usize>> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    DiscretePmf::from_counts(&length_counts(corpus))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FractionClass {
    Stopword,
    Symbol,
}

impl FractionClass {
    fn token_class(self) -> TokenClass {
        match self {
            FractionClass::Stopword => TokenClass::Stopword,
            FractionClass::Symbol => TokenClass::Symbol,
        }
    }
}

/// Per-document fraction of tokens in one class; empty documents excluded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionSample {
    pub class: FractionClass,
    pub values: Vec<f64>,
}

impl FractionSample {
    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

fn class_fraction(doc: &Document, class: TokenClass, stopwords: &StopwordSet) -> f64 {
    let hits = doc
        .tokens()
        .iter()
        .filter(|t| classify_token(t, stopwords) == class)
        .count();
    hits as f64 / doc.len() as f64
}

pub fn fraction_distribution(corpus: &Corpus, class: FractionClass, stopwords: &StopwordSet) -> Result<FractionSample> {
    let target = class.token_class();
    let values: Vec<f64> = corpus
        .documents()
        .par_iter()
        .filter(|d| !d.is_empty())
        .map(|d| class_fraction(d, target, stopwords))
        .collect();
    if values.is_empty() {
        return Err(Error::AllDocumentsEmpty);
    }
    Ok(FractionSample { class, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NgramOrder {
    #[serde(rename = "1")]
    Unigram,
    #[serde(rename = "2")]
    Bigram,
}

impl NgramOrder {
    pub fn as_usize(self) -> usize {
        match self {
            NgramOrder::Unigram => 1,
            NgramOrder::Bigram => 2,
        }
    }

    pub fn from_usize(n: usize) -> Result<Self> {
        match n {
            1 => Ok(NgramOrder::Unigram),
            2 => Ok(NgramOrder::Bigram),
            _ => Err(Error::InvalidParameter(format!("n-gram order must be 1 or 2, got {n}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservationMode {
    /// One observation per document at its full length.
    Terminal,
    /// One observation per prefix length of every document.
    Prefix,
}

/// Number of distinct n-gram types `types` within the first `length` tokens.
///
/// For bigrams, `types <= length - 1`, so a one-token prefix has zero types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeTokenObservation {
    pub length: u64,
    pub types: u64,
    pub order: NgramOrder,
}

/// Distinct-type counts u(y_{<=t}) for t = 1..=len.
pub fn prefix_type_counts(doc: &Document, order: NgramOrder) -> Vec<u64> {
    let tokens = doc.tokens();
    let mut out = Vec::with_capacity(tokens.len());
    match order {
        NgramOrder::Unigram => {
            let mut seen: HashSet<&str> = HashSet::new();
            for t in tokens {
                seen.insert(t);
                out.push(seen.len() as u64);
            }
        }
        NgramOrder::Bigram => {
            let mut seen: HashSet<(&str, &str)> = HashSet::new();
            for (i, _) in tokens.iter().enumerate() {
                if i > 0 {
                    seen.insert((&tokens[i - 1], &tokens[i]));
                }
                out.push(seen.len() as u64);
            }
        }
    }
    out
}

pub fn type_token_observations(corpus: &Corpus, order: NgramOrder, mode: ObservationMode) -> Vec<TypeTokenObservation> {
    let per_doc: Vec<Vec<TypeTokenObservation>> = corpus
        .documents()
        .par_iter()
        .filter(|d| !d.is_empty())
        .map(|d| {
            let counts = prefix_type_counts(d, order);
            let obs = |(i, &k): (usize, &u64)| TypeTokenObservation {
                length: i as u64 + 1,
                types: k,
                order,
            };
            match mode {
                ObservationMode::Terminal => {
                    let last = counts.len() - 1;
                    vec![obs((last, &counts[last]))]
                }
                ObservationMode::Prefix => counts.iter().enumerate().map(obs).collect(),
            }
        })
        .collect();
    per_doc.into_iter().flatten().collect()
}

/// Mean number of types at each prefix length t, averaged over the
/// documents whose length is at least t.
pub fn type_token_curve(corpus: &Corpus, order: NgramOrder) -> Vec<(usize, f64)> {
    let (sums, counts) = corpus
        .documents()
        .par_iter()
        .filter(|d| !d.is_empty())
        .fold(
            || (Vec::<u64>::new(), Vec::<u64>::new()),
            |(mut sums, mut counts), d| {
                let prefix = prefix_type_counts(d, order);
                if sums.len() < prefix.len() {
                    sums.resize(prefix.len(), 0);
                    counts.resize(prefix.len(), 0);
                }
                for (i, k) in prefix.into_iter().enumerate() {
                    sums[i] += k;
                    counts[i] += 1;
                }
                (sums, counts)
            },
        )
        .reduce(
            || (Vec::new(), Vec::new()),
            |(mut s1, mut c1), (s2, c2)| {
                if s1.len() < s2.len() {
                    s1.resize(s2.len(), 0);
                    c1.resize(c2.len(), 0);
                }
                for i in 0..s2.len() {
                    s1[i] += s2[i];
                    c1[i] += c2[i];
                }
                (s1, c1)
            },
        );
    sums.iter()
        .zip(&counts)
        .enumerate()
        .map(|(i, (&s, &c))| (i + 1, s as f64 / c as f64))
        .collect()
}

pub fn curve_to_csv(curve: &[(usize, f64)]) -> String {
    let mut out = String::from("t,mean_types\n");
    for (t, m) in curve {
        out.push_str(&format!("{t},{m}\n"));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSpread {
    pub replicates: usize,
    pub seed: u64,
    pub sd_length: f64,
    pub sd_stop: f64,
    pub sd_sym: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub documents: usize,
    pub tokens: u64,
    pub mean_length: f64,
    pub mean_stop: f64,
    pub mean_sym: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapSpread>,
}

pub fn summary_stats(corpus: &Corpus, stopwords: &StopwordSet) -> Result<SummaryStats> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let lengths: Vec<f64> = corpus.documents().iter().map(|d| d.len() as f64).collect();
    let stop = fraction_distribution(corpus, FractionClass::Stopword, stopwords)?;
    let sym = fraction_distribution(corpus, FractionClass::Symbol, stopwords)?;
    Ok(SummaryStats {
        documents: corpus.len(),
        tokens: corpus.total_tokens(),
        mean_length: mean(&lengths),
        mean_stop: stop.mean(),
        mean_sym: sym.mean(),
        bootstrap: None,
    })
}

/// Summary statistics plus bootstrap standard deviations: documents are
/// resampled with replacement `replicates` times.
pub fn summary_stats_bootstrap(
    corpus: &Corpus,
    stopwords: &StopwordSet,
    replicates: usize,
    seed: u64,
) -> Result<SummaryStats> {
    if replicates < 2 {
        return Err(Error::InvalidParameter("bootstrap needs at least 2 replicates".into()));
    }
    let mut stats = summary_stats(corpus, stopwords)?;
    // (length, Some((stop, sym))) per document; empty documents carry no fractions
    let per_doc: Vec<(f64, Option<(f64, f64)>)> = corpus
        .documents()
        .par_iter()
        .map(|d| {
            let fr = (!d.is_empty()).then(|| {
                (
                    class_fraction(d, TokenClass::Stopword, stopwords),
                    class_fraction(d, TokenClass::Symbol, stopwords),
                )
            });
            (d.len() as f64, fr)
        })
        .collect();
    let n = per_doc.len();
    let draws: Vec<(f64, f64, f64)> = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let (mut len_sum, mut stop_sum, mut sym_sum, mut nonempty) = (0.0, 0.0, 0.0, 0usize);
            for _ in 0..n {
                let (len, fr) = per_doc[rng.random_range(0..n)];
                len_sum += len;
                if let Some((st, sy)) = fr {
                    stop_sum += st;
                    sym_sum += sy;
                    nonempty += 1;
                }
            }
            let nn = nonempty.max(1) as f64;
            (len_sum / n as f64, stop_sum / nn, sym_sum / nn)
        })
        .collect();
    let sd = |f: fn(&(f64, f64, f64)) -> f64| {
        let xs: Vec<f64> = draws.iter().map(f).collect();
        let m = mean(&xs);
        (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
    };
    stats.bootstrap = Some(BootstrapSpread {
        replicates,
        seed,
        sd_length: sd(|d| d.0),
        sd_stop: sd(|d| d.1),
        sd_sym: sd(|d| d.2),
    });
    Ok(stats)
}
