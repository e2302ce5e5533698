//! Statistical tendencies of natural-language corpora and the tests used to
//! compare a generated corpus against a reference one.
//!
//! The crate covers tokenized corpus ingestion ([`corpus`]), descriptive
//! statistics ([`stats`]), maximum-likelihood fits of Zipf's and Heaps'
//! laws ([`fit`]), distances and resampling tests ([`hypothesis`]), a
//! trigram language model with several decoding schemes ([`lm`]) and the
//! end-to-end reports built from them ([`report`]).

// `!(x > 0.0)` is used on purpose so that NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod error;
pub mod fit;
pub mod hypothesis;
pub mod lm;
pub mod report;
pub mod rng;
pub mod stats;

pub use corpus::{load_corpus, tokenize, Corpus, Document, IngestOptions, StopwordSet, Vocabulary};
pub use error::{Error, ErrorKind, Result};
pub use fit::{fit_heaps_mle, fit_zipf_mle, HeapsFit, ParametricCdf, ZipfFit};
pub use hypothesis::{KsResult, PermutationResult, TvdResult};
pub use lm::{generate_corpus, SamplerConfig, Scheme, TrigramModel};
pub use report::{analyze, compare, AnalysisReport, AnalyzeConfig, CompareConfig, ComparisonReport};
pub use stats::{NgramOrder, RankFrequencyTable, SummaryStats, TypeTokenObservation};
