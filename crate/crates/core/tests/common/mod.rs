#![allow(dead_code)]

use std::fs::File;
use std::io::Read;

use flate2::read::GzDecoder;
use lmstats::{Corpus, IngestOptions};

/// Sentences from a Wikipedia dump, one per line.
pub fn wiki_lines() -> Vec<String> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/wiki_sentences.txt.gz");
    let mut text = String::new();
    GzDecoder::new(File::open(path).expect("fixture present"))
        .read_to_string(&mut text)
        .expect("fixture is gzipped UTF-8");
    text.lines().map(str::to_owned).collect()
}

pub fn wiki_corpus(n: usize) -> Corpus {
    let lines = wiki_lines();
    Corpus::from_lines(lines.iter().take(n).map(String::as_str), &IngestOptions::default())
}

/// Exact truncated Zipf(s, K) sampler by inverse cdf; returns counts per rank.
pub fn zipf_counts(s: f64, k: usize, n: usize, seed: u64) -> Vec<u64> {
    use rand::{Rng, SeedableRng};
    let weights: Vec<f64> = (1..=k).map(|r| (r as f64).powf(-s)).collect();
    let z: f64 = weights.iter().sum();
    let mut cdf = Vec::with_capacity(k);
    let mut acc = 0.0;
    for w in &weights {
        acc += w / z;
        cdf.push(acc);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; k];
    for _ in 0..n {
        let u: f64 = rng.random();
        let r = cdf.partition_point(|&c| c <= u).min(k - 1);
        counts[r] += 1;
    }
    counts
}

/// sup |F_n(x) - x| for a sample on [0, 1].
pub fn ks_to_uniform(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}
