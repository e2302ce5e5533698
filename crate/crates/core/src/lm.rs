//! Unsmoothed trigram language model and corpus generation.
//!
//! p(x | a, b) = c(a, b, x) / sum_x' c(a, b, x'), with every document padded
//! as `BOS BOS tokens... EOS`. Three decoding schemes produce documents:
//! ancestral sampling, nucleus (top-p) sampling and stochastic beam search.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Token id of the beginning-of-sequence marker.
pub const BOS: u32 = 0;
/// Token id of the end-of-sequence marker.
pub const EOS: u32 = 1;

const BOS_LABEL: &str = "<BOS>";
const EOS_LABEL: &str = "<EOS>";
const MODEL_FORMAT: &str = "lmstats-trigram";
const MODEL_VERSION: u32 = 1;

/// Word ids start after the two markers and follow lexicographic order of
/// the words, so comparing ids compares words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrigramModel {
    words: Vec<String>,
    index: HashMap<String, u32>,
    /// Successor counts per context, sorted by count descending then id.
    contexts: BTreeMap<(u32, u32), Vec<(u32, u64)>>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    words: Vec<String>,
    /// `[a, b, x, count]` sorted by `(a, b, x)`; ids 0 and 1 are BOS and EOS.
    entries: Vec<[u64; 4]>,
}

impl TrigramModel {
    pub fn train(corpus: &Corpus) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let vocab: BTreeSet<&str> = corpus
            .documents()
            .iter()
            .flat_map(|d| d.tokens().iter().map(String::as_str))
            .collect();
        let words: Vec<String> = vocab.into_iter().map(str::to_owned).collect();
        let index = word_index(&words);
        let counts = corpus
            .documents()
            .par_iter()
            .fold(HashMap::new, |mut acc: HashMap<(u32, u32, u32), u64>, doc| {
                let (mut a, mut b) = (BOS, BOS);
                let ids = doc.tokens().iter().map(|t| index[t.as_str()]).chain([EOS]);
                for x in ids {
                    *acc.entry((a, b, x)).or_default() += 1;
                    (a, b) = (b, x);
                }
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_default() += v;
                }
                a
            });
        Ok(Self::from_counts(words, index, counts))
    }

    fn from_counts(
        words: Vec<String>,
        index: HashMap<String, u32>,
        counts: impl IntoIterator<Item = ((u32, u32, u32), u64)>,
    ) -> Self {
        let mut contexts: BTreeMap<(u32, u32), Vec<(u32, u64)>> = BTreeMap::new();
        for ((a, b, x), c) in counts {
            contexts.entry((a, b)).or_default().push((x, c));
        }
        for succ in contexts.values_mut() {
            succ.sort_by(|p, q| q.1.cmp(&p.1).then(p.0.cmp(&q.0)));
        }
        TrigramModel { words, index, contexts }
    }

    /// Id of a word, or `None` if it never occurred in training.
    pub fn token_id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    /// The word for an id; the markers render as `<BOS>` and `<EOS>`.
    pub fn word(&self, id: u32) -> &str {
        match id {
            BOS => BOS_LABEL,
            EOS => EOS_LABEL,
            _ => &self.words[id as usize - 2],
        }
    }

    /// Number of distinct words, not counting the markers.
    pub fn vocabulary_size(&self) -> usize {
        self.words.len()
    }

    pub fn context_count(&self) -> usize {
        self.contexts.len()
    }

    /// Raw count c(a, b, x).
    pub fn count(&self, context: (u32, u32), token: u32) -> u64 {
        self.contexts
            .get(&context)
            .and_then(|s| s.iter().find(|e| e.0 == token))
            .map_or(0, |e| e.1)
    }

    /// p(. | a, b) with successors in descending-probability order.
    pub fn conditional(&self, context: (u32, u32)) -> Result<CategoricalStep> {
        let succ = self.contexts.get(&context).ok_or_else(|| {
            let label = |id: u32| {
                if (id as usize) < self.words.len() + 2 {
                    self.word(id).to_owned()
                } else {
                    format!("#{id}")
                }
            };
            Error::UnseenContext(label(context.0), label(context.1))
        })?;
        let total: u64 = succ.iter().map(|e| e.1).sum();
        Ok(CategoricalStep {
            tokens: succ.iter().map(|e| e.0).collect(),
            probs: succ.iter().map(|e| e.1 as f64 / total as f64).collect(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut entries: Vec<[u64; 4]> = self
            .contexts
            .iter()
            .flat_map(|(&(a, b), succ)| succ.iter().map(move |&(x, c)| [a.into(), b.into(), x.into(), c]))
            .collect();
        entries.sort_unstable();
        let file = ModelFile {
            format: MODEL_FORMAT.to_owned(),
            version: MODEL_VERSION,
            words: self.words.clone(),
            entries,
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        let bad = |m: String| Err(Error::MalformedModel(m));
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return bad(format!("unsupported format {:?} version {}", file.format, file.version));
        }
        if !file.words.windows(2).all(|w| w[0] < w[1]) {
            return bad("words are not strictly sorted".into());
        }
        if let Some(w) = file
            .words
            .iter()
            .find(|w| w.is_empty() || w.chars().any(char::is_whitespace))
        {
            return bad(format!("invalid word {w:?}"));
        }
        let n_ids = file.words.len() as u64 + 2;
        let mut counts = Vec::with_capacity(file.entries.len());
        let mut seen = BTreeSet::new();
        for [a, b, x, c] in file.entries {
            if a >= n_ids || b >= n_ids || x >= n_ids || c == 0 || x == u64::from(BOS) {
                return bad(format!("invalid entry [{a}, {b}, {x}, {c}]"));
            }
            if !seen.insert((a, b, x)) {
                return bad(format!("duplicate entry for ({a}, {b}, {x})"));
            }
            counts.push(((a as u32, b as u32, x as u32), c));
        }
        let index = word_index(&file.words);
        let model = Self::from_counts(file.words, index, counts);
        if !model.contexts.contains_key(&(BOS, BOS)) {
            return bad("no (BOS, BOS) context".into());
        }
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn word_index(words: &[String]) -> HashMap<String, u32> {
    words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i as u32 + 2))
        .collect()
}

/// A next-token distribution, highest probability first (ties by id).
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalStep {
    tokens: Vec<u32>,
    probs: Vec<f64>,
}

impl CategoricalStep {
    /// Builds a step from `(token, probability)` pairs. Probabilities must be
    /// positive and sum to 1 within 1e-12; tokens must be distinct.
    pub fn new(pairs: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut pairs: Vec<(u32, f64)> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(Error::EmptySample);
        }
        if pairs.iter().any(|p| !(p.1 > 0.0) || !p.1.is_finite()) {
            return Err(Error::InvalidParameter("probabilities must be positive".into()));
        }
        let mass: f64 = pairs.iter().map(|p| p.1).sum();
        if (mass - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { mass });
        }
        pairs.sort_by(|p, q| q.1.total_cmp(&p.1).then(p.0.cmp(&q.0)));
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter("duplicate token".into()));
        }
        Ok(CategoricalStep {
            tokens: pairs.iter().map(|p| p.0).collect(),
            probs: pairs.iter().map(|p| p.1).collect(),
        })
    }

    pub fn tokens(&self) -> &[u32] {
        &self.tokens
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn prob(&self, token: u32) -> f64 {
        self.tokens
            .iter()
            .position(|&t| t == token)
            .map_or(0.0, |i| self.probs[i])
    }

    /// Inverse-cdf draw using a single uniform variate.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (u32, f64) {
        let u: f64 = rng.random();
        let mut cum = 0.0;
        for (&t, &p) in self.tokens.iter().zip(&self.probs) {
            cum += p;
            if u < cum {
                return (t, p);
            }
        }
        let last = self.tokens.len() - 1;
        (self.tokens[last], self.probs[last])
    }
}

/// Keeps the smallest highest-probability prefix with mass at least `n`,
/// renormalized. With `n = 1` the step is returned unchanged.
pub fn nucleus_truncate(step: &CategoricalStep, n: f64) -> CategoricalStep {
    let mut cum = 0.0;
    let mut keep = step.len();
    for (i, &p) in step.probs.iter().enumerate() {
        cum += p;
        if cum >= n - 1e-12 {
            keep = i + 1;
            break;
        }
    }
    if keep == step.len() {
        return step.clone();
    }
    let z: f64 = step.probs[..keep].iter().sum();
    CategoricalStep {
        tokens: step.tokens[..keep].to_vec(),
        probs: step.probs[..keep].iter().map(|p| p / z).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Random,
    Nucleus,
    Beam,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Scheme::Random),
            "nucleus" => Ok(Scheme::Nucleus),
            "beam" => Ok(Scheme::Beam),
            _ => Err(Error::InvalidParameter(format!(
                "unknown scheme {s:?} (expected random, nucleus or beam)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub scheme: Scheme,
    pub nucleus_mass: f64,
    pub beam_size: usize,
    pub max_length: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            scheme: Scheme::Random,
            nucleus_mass: 0.95,
            beam_size: 5,
            max_length: 1024,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nucleus_mass > 0.0 && self.nucleus_mass <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "nucleus mass must be in (0, 1], got {}",
                self.nucleus_mass
            )));
        }
        if self.beam_size == 0 {
            return Err(Error::InvalidParameter("beam size must be at least 1".into()));
        }
        if self.max_length == 0 {
            return Err(Error::InvalidParameter("max length must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub document: Document,
    /// Stopped at `max_length` before emitting EOS.
    pub truncated: bool,
}

fn to_document(model: &TrigramModel, ids: &[u32]) -> Document {
    Document::from_tokens(ids.iter().map(|&id| model.word(id))).expect("vocabulary words are valid tokens")
}

/// Draws one document token by token from (BOS, BOS); with
/// `Scheme::Nucleus` every step is truncated first.
pub fn sample_ancestral<R: Rng + ?Sized>(
    model: &TrigramModel,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<Generated> {
    config.validate()?;
    let mut ids = Vec::new();
    let (mut a, mut b) = (BOS, BOS);
    while ids.len() < config.max_length {
        let mut step = model.conditional((a, b))?;
        if config.scheme == Scheme::Nucleus {
            step = nucleus_truncate(&step, config.nucleus_mass);
        }
        let (x, _) = step.draw(rng);
        if x == EOS {
            return Ok(Generated {
                document: to_document(model, &ids),
                truncated: false,
            });
        }
        ids.push(x);
        (a, b) = (b, x);
    }
    Ok(Generated {
        document: to_document(model, &ids),
        truncated: true,
    })
}

#[derive(Debug, Clone, PartialEq)]
struct Hypothesis {
    ids: Vec<u32>,
    log_prob: f64,
    finished: bool,
}

impl Hypothesis {
    fn context(&self) -> (u32, u32) {
        let n = self.ids.len();
        match n {
            0 => (BOS, BOS),
            1 => (BOS, self.ids[0]),
            _ => (self.ids[n - 2], self.ids[n - 1]),
        }
    }
}

/// Higher score first, then lexicographically smaller token sequence.
fn rank(p: &Hypothesis, q: &Hypothesis) -> std::cmp::Ordering {
    q.log_prob
        .total_cmp(&p.log_prob)
        .then_with(|| p.ids.cmp(&q.ids))
        .then_with(|| p.finished.cmp(&q.finished))
}

/// Stochastic beam search. Each live hypothesis draws `k` extensions with
/// replacement from its conditional; finished hypotheses stay on the beam
/// and compete with the new candidates on cumulative log-probability. The
/// best finished hypothesis is returned, or the best unfinished one if none
/// finished within `max_length` tokens.
pub fn sample_beam<R: Rng + ?Sized>(model: &TrigramModel, config: &SamplerConfig, rng: &mut R) -> Result<Generated> {
    config.validate()?;
    let k = config.beam_size;
    let mut beam = vec![Hypothesis {
        ids: Vec::new(),
        log_prob: 0.0,
        finished: false,
    }];
    for _ in 0..config.max_length {
        let mut candidates = Vec::with_capacity(k * k + k);
        for hyp in &beam {
            if hyp.finished {
                candidates.push(hyp.clone());
                continue;
            }
            let step = model.conditional(hyp.context())?;
            for _ in 0..k {
                let (x, p) = step.draw(rng);
                let mut next = hyp.clone();
                next.log_prob += p.ln();
                if x == EOS {
                    next.finished = true;
                } else {
                    next.ids.push(x);
                }
                candidates.push(next);
            }
        }
        candidates.sort_by(rank);
        candidates.dedup_by(|p, q| p.ids == q.ids && p.finished == q.finished);
        candidates.truncate(k);
        beam = candidates;
        if beam.iter().all(|h| h.finished) {
            break;
        }
    }
    // the beam is sorted, so the first finished entry is the best one
    let best = beam.iter().find(|h| h.finished).unwrap_or(&beam[0]);
    Ok(Generated {
        document: to_document(model, &best.ids),
        truncated: !best.finished,
    })
}

/// One document with the configured scheme.
pub fn sample_document<R: Rng + ?Sized>(
    model: &TrigramModel,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<Generated> {
    match config.scheme {
        Scheme::Random | Scheme::Nucleus => sample_ancestral(model, config, rng),
        Scheme::Beam => sample_beam(model, config, rng),
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedCorpus {
    pub corpus: Corpus,
    pub truncated: usize,
}

/// `n` documents; document `i` is drawn from stream `(config.seed, i)`.
pub fn generate_corpus(model: &TrigramModel, config: &SamplerConfig, n: usize) -> Result<GeneratedCorpus> {
    config.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("number of documents must be at least 1".into()));
    }
    let docs: Vec<Generated> = (0..n)
        .into_par_iter()
        .map(|i| sample_document(model, config, &mut stream_rng(config.seed, i as u64)))
        .collect::<Result<_>>()?;
    let truncated = docs.iter().filter(|g| g.truncated).count();
    let label = format!(
        "trigram-{}",
        serde_json::to_value(config.scheme)?.as_str().unwrap_or("")
    );
    Ok(GeneratedCorpus {
        corpus: Corpus::new(docs.into_iter().map(|g| g.document).collect(), label),
        truncated,
    })
}
