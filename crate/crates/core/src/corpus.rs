//! Corpus ingestion: tokenization, token classes and vocabulary counts.
//!
//! Input is plain UTF-8 text with one document per line. The default
//! tokenizer lowercases, splits on whitespace and then separates every
//! maximal run of punctuation from the surrounding characters, e.g.
//! `"The cat, sat."` becomes `the cat , sat .`. Text that was already
//! tokenized by an external tool can be loaded in pre-tokenized mode, which
//! only splits on whitespace.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};

use crate::error::{Error, Result};

const ENGLISH_STOPWORDS: &str = include_str!("../data/stopwords_english.txt");

/// A tokenized document. Its length is the number of tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    tokens: Vec<String>,
}

impl Document {
    /// Builds a document from tokens that are already split.
    ///
    /// Tokens must be non-empty and free of whitespace; this is checked.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        if let Some(bad) = tokens
            .iter()
            .find(|t| t.is_empty() || t.chars().any(char::is_whitespace))
        {
            return Err(Error::InvalidParameter(format!(
                "token {bad:?} is empty or contains whitespace"
            )));
        }
        Ok(Document { tokens })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens joined by single spaces (the on-disk line format).
    pub fn to_line(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Options controlling how raw lines become documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOptions {
    pub lowercase: bool,
    /// Only split on whitespace; skip punctuation separation.
    pub pretokenized: bool,
    /// Keep lines that tokenize to nothing as empty documents.
    pub keep_empty: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            lowercase: true,
            pretokenized: false,
            keep_empty: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    documents: Vec<Document>,
    source_label: String,
}

impl Corpus {
    pub fn new(documents: Vec<Document>, source_label: impl Into<String>) -> Self {
        Corpus {
            documents,
            source_label: source_label.into(),
        }
    }

    /// Tokenizes in-memory lines with the given options.
    pub fn from_lines<'a, I>(lines: I, options: &IngestOptions) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let documents = lines
            .into_iter()
            .map(|line| tokenize_with(line, options))
            .filter(|d| options.keep_empty || !d.is_empty())
            .collect();
        Corpus::new(documents, "<memory>")
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn total_tokens(&self) -> u64 {
        self.documents.iter().map(|d| d.len() as u64).sum()
    }

    /// One document per line, tokens separated by single spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for doc in &self.documents {
            out.push_str(&doc.to_line());
            out.push('\n');
        }
        out
    }
}

/// Classification of a single token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenClass {
    Stopword,
    Symbol,
    Other,
}

/// A set of stopwords. The bundled default is the 179-word English list
/// shipped with NLTK.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordSet {
    words: HashSet<String>,
}

impl StopwordSet {
    pub fn english() -> Self {
        StopwordSet::parse(ENGLISH_STOPWORDS)
    }

    /// Parses one token per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_owned)
            .collect();
        StopwordSet { words }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let text = decode_lines(&bytes)?.join("\n");
        Ok(StopwordSet::parse(&text))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl Default for StopwordSet {
    fn default() -> Self {
        StopwordSet::english()
    }
}

/// Token occurrence counts over a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    entries: BTreeMap<String, u64>,
    total_tokens: u64,
}

impl Vocabulary {
    pub fn entries(&self) -> &BTreeMap<String, u64> {
        &self.entries
    }

    pub fn count(&self, token: &str) -> u64 {
        self.entries.get(token).copied().unwrap_or(0)
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Number of distinct types.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub(crate) fn is_punctuation(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

fn is_decimal_digit(c: char) -> bool {
    get_general_category(c) == GeneralCategory::DecimalNumber
}

/// Tokenizes one line with punctuation splitting.
pub fn tokenize(raw_line: &str, lowercase: bool) -> Document {
    tokenize_with(
        raw_line,
        &IngestOptions {
            lowercase,
            pretokenized: false,
            keep_empty: true,
        },
    )
}

/// Tokenizes one line according to `options` (`keep_empty` is ignored here).
pub fn tokenize_with(raw_line: &str, options: &IngestOptions) -> Document {
    let lowered;
    let text = if options.lowercase {
        lowered = raw_line.to_lowercase();
        lowered.as_str()
    } else {
        raw_line
    };

    let mut tokens = Vec::new();
    for unit in text.split_whitespace() {
        if options.pretokenized {
            tokens.push(unit.to_owned());
            continue;
        }
        let mut start = 0;
        let mut current: Option<bool> = None;
        for (i, c) in unit.char_indices() {
            let punct = is_punctuation(c);
            match current {
                Some(prev) if prev != punct => {
                    tokens.push(unit[start..i].to_owned());
                    start = i;
                }
                _ => {}
            }
            current = Some(punct);
        }
        tokens.push(unit[start..].to_owned());
    }
    Document { tokens }
}

/// Symbol if every character is punctuation or a decimal digit, otherwise
/// stopword if listed, otherwise other.
pub fn classify_token(token: &str, stopwords: &StopwordSet) -> TokenClass {
    if !token.is_empty() && token.chars().all(|c| is_punctuation(c) || is_decimal_digit(c)) {
        TokenClass::Symbol
    } else if stopwords.contains(token) {
        TokenClass::Stopword
    } else {
        TokenClass::Other
    }
}

/// Splits raw bytes into lines, validating UTF-8 per line. Line numbers in
/// errors are 1-based. A trailing newline does not start an extra line.
fn decode_lines(bytes: &[u8]) -> Result<Vec<&str>> {
    if bytes.is_empty() {
        return Ok(Vec::new());
    }
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    body.split(|&b| b == b'\n')
        .enumerate()
        .map(|(i, line)| {
            let line = line.strip_suffix(b"\r").unwrap_or(line);
            std::str::from_utf8(line).map_err(|_| Error::InvalidUtf8 { line: i + 1 })
        })
        .collect()
}

/// Reads a corpus file, one document per line, in file order.
pub fn load_corpus(path: impl AsRef<Path>, options: &IngestOptions) -> Result<Corpus> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let lines = decode_lines(&bytes)?;
    let documents: Vec<Document> = lines
        .par_iter()
        .map(|line| tokenize_with(line, options))
        .collect::<Vec<_>>()
        .into_iter()
        .filter(|d| options.keep_empty || !d.is_empty())
        .collect();
    Ok(Corpus::new(documents, path.display().to_string()))
}

/// Counts every token occurrence in the corpus.
pub fn vocabulary(corpus: &Corpus) -> Vocabulary {
    let counts = corpus
        .documents()
        .par_iter()
        .fold(HashMap::<&str, u64>::new, |mut acc, doc| {
            for t in doc.tokens() {
                *acc.entry(t.as_str()).or_default() += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    let total_tokens = counts.values().sum();
    let entries = counts.into_iter().map(|(k, v)| (k.to_owned(), v)).collect();
    Vocabulary { entries, total_tokens }
}
