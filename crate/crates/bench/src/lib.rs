//! Fixture generators shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `docs` lines of text whose words follow a Zipf(s) law over a vocabulary
/// of `vocab` synthetic words, with lengths uniform on 5..=40.
pub fn zipf_text(docs: usize, vocab: usize, s: f64, seed: u64) -> Vec<String> {
    let mut acc = 0.0;
    let cdf: Vec<f64> = (1..=vocab)
        .map(|r| {
            acc += (r as f64).powf(-s);
            acc
        })
        .collect();
    let words: Vec<String> = (0..vocab).map(|i| format!("w{i}")).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..docs)
        .map(|_| {
            let len = rng.random_range(5..=40);
            let line: Vec<&str> = (0..len)
                .map(|_| {
                    let u = rng.random::<f64>() * acc;
                    words[cdf.partition_point(|&c| c <= u).min(vocab - 1)].as_str()
                })
                .collect();
            line.join(" ") + " ."
        })
        .collect()
}

/// Counts per rank for `n` Zipf(s) draws, in descending order with zeros removed.
pub fn zipf_rank_counts(n: usize, vocab: usize, s: f64, seed: u64) -> Vec<u64> {
    let mut counts = vec![0u64; vocab];
    for line in zipf_text(n / 20 + 1, vocab, s, seed) {
        for w in line.split_whitespace().filter(|w| *w != ".") {
            counts[w[1..].parse::<usize>().unwrap()] += 1;
        }
    }
    counts.retain(|&c| c > 0);
    counts.sort_unstable_by(|a, b| b.cmp(a));
    counts
}
