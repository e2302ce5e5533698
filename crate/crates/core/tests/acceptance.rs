//! Acceptance gate. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use lmstats::corpus::{Document, StopwordSet};
use lmstats::fit::{fit_heaps_mle, fit_zipf_mle, heaps_gradient, heaps_loglik};
use lmstats::hypothesis::{
    ks_by_length, ks_one_sample, ks_two_sample, mean_diff_permutation_test, tvd_permutation_test, Histogram,
    LengthKsOptions, LengthReference,
};
use lmstats::lm::{generate_corpus, nucleus_truncate, CategoricalStep, SamplerConfig, Scheme, TrigramModel, BOS};
use lmstats::report::{comparative_rows, compare, to_json, CompareConfig};
use lmstats::rng::stream_rng;
use lmstats::stats::{
    fraction_distribution, length_distribution, prefix_type_counts, rank_frequency, summary_stats_bootstrap,
    type_token_curve, unigram_pmf, FractionClass, NgramOrder, ObservationMode, RankFrequencyTable,
    TypeTokenObservation,
};
use lmstats::Corpus;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ---------------------------------------------------------------------------

fn zipf_recovery() -> Outcome {
    let mut counts = common::zipf_counts(1.2, 10_000, 1_000_000, 11);
    counts.retain(|&c| c > 0);
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let table = RankFrequencyTable::from_ranked_counts(&counts).unwrap();

    let start = Instant::now();
    let fit = fit_zipf_mle(&table).unwrap();
    let elapsed = start.elapsed();

    // independent grid oracle over the log-likelihood
    let k = counts.len();
    let total: f64 = counts.iter().map(|&c| c as f64).sum();
    let weighted_log: f64 = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 * ((i + 1) as f64).ln())
        .sum();
    let loglik = |s: f64| -> f64 {
        let h: f64 = (1..=k).map(|r| (r as f64).powf(-s)).sum();
        -total * h.ln() - s * weighted_log
    };
    let (mut best_s, mut best_l) = (0.0, f64::NEG_INFINITY);
    for i in 0..=5000 {
        let s = i as f64 * 1e-3;
        let l = loglik(s);
        if l > best_l {
            (best_s, best_l) = (s, l);
        }
    }
    let in_range = (1.19..=1.21).contains(&fit.s);
    let agrees = (fit.s - best_s).abs() <= 1e-3;
    let fast = elapsed < Duration::from_secs(5);
    outcome(
        in_range && agrees && fast,
        format!(
            "s_hat={:.5} in [1.19, 1.21]: {in_range}; grid argmax {best_s:.3}, |diff| {:.2e} <= 1e-3: {agrees}; fit {:.3}s < 5s: {fast}",
            fit.s,
            (fit.s - best_s).abs(),
            elapsed.as_secs_f64()
        ),
    )
}

fn heaps_recovery() -> Outcome {
    let (alpha, beta) = (1.39, 0.841);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let obs: Vec<TypeTokenObservation> = (0..10_000)
        .map(|_| {
            let t: u64 = rng.random_range(1..=1000);
            let types = Poisson::new(alpha * (t as f64).powf(beta)).unwrap().sample(&mut rng) as u64;
            TypeTokenObservation {
                length: t,
                types,
                order: NgramOrder::Unigram,
            }
        })
        .collect();
    let fit = fit_heaps_mle(&obs).unwrap();
    let beta_ok = (fit.beta - beta).abs() <= 0.02;
    let alpha_ok = (fit.alpha - alpha).abs() <= 0.05;

    let (d_alpha, _) = heaps_gradient(&obs, fit.alpha, fit.beta).unwrap();
    let profile_ok = d_alpha.abs() <= 1e-9;

    let mut worst = 0.0f64;
    for &(a, b) in &[(1.2, 0.8), (1.5, 0.9), (0.9, 0.7), (fit.alpha * 1.01, fit.beta - 0.01)] {
        let (ga, gb) = heaps_gradient(&obs, a, b).unwrap();
        let fd = |f: &dyn Fn(f64) -> f64, x: f64| {
            let h = 1e-5 * x.abs().max(1.0);
            (f(x + h) - f(x - h)) / (2.0 * h)
        };
        let na = fd(&|x| heaps_loglik(&obs, x, b).unwrap(), a);
        let nb = fd(&|x| heaps_loglik(&obs, a, x).unwrap(), b);
        worst = worst.max(((ga - na) / na).abs()).max(((gb - nb) / nb).abs());
    }
    let grad_ok = worst <= 1e-6;
    outcome(
        beta_ok && alpha_ok && profile_ok && grad_ok,
        format!(
            "beta_hat={:.4} (|err| {:.4} <= 0.02), alpha_hat={:.4} (|err| {:.4} <= 0.05); dL/dalpha at fit {:.2e} <= 1e-9; worst finite-difference rel err {:.2e} <= 1e-6",
            fit.beta,
            (fit.beta - beta).abs(),
            fit.alpha,
            (fit.alpha - alpha).abs(),
            d_alpha.abs(),
            worst
        ),
    )
}

/// Full enumeration of splits by bitmask, written independently of the
/// library's lexicographic enumeration.
fn permutation_oracle(s1: &[f64], s2: &[f64]) -> f64 {
    let pool: Vec<f64> = s1.iter().chain(s2).copied().collect();
    let (n, m) = (s1.len(), s2.len());
    let observed = s1.iter().sum::<f64>() / n as f64 - s2.iter().sum::<f64>() / m as f64;
    let mut dist = Vec::new();
    for mask in 0u32..(1 << pool.len()) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let (mut a, mut b) = (0.0, 0.0);
        for (i, x) in pool.iter().enumerate() {
            if mask & (1 << i) != 0 {
                a += x;
            } else {
                b += x;
            }
        }
        dist.push(a / n as f64 - b / m as f64);
    }
    let center = dist.iter().sum::<f64>() / dist.len() as f64;
    let tol = 1e-9 * pool.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let hits = dist
        .iter()
        .filter(|d| (*d - center).abs() >= (observed - center).abs() - tol)
        .count();
    hits as f64 / dist.len() as f64
}

fn exact_permutation_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut cases = 0;
    let mut mismatches = Vec::new();
    for total in 2..=10usize {
        for n in 1..total {
            for rep in 0..12 {
                // alternate continuous values and small integers (heavy ties)
                let draw = |rng: &mut ChaCha8Rng| -> f64 {
                    if rep % 2 == 0 {
                        rng.random_range(-100.0..100.0)
                    } else {
                        f64::from(rng.random_range(0..4u8))
                    }
                };
                let s1: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
                let s2: Vec<f64> = (n..total).map(|_| draw(&mut rng)).collect();
                let r = mean_diff_permutation_test(&s1, &s2, 1000, 0, u64::MAX).unwrap();
                let oracle = permutation_oracle(&s1, &s2);
                cases += 1;
                if !r.exhaustive || r.p_value != oracle {
                    mismatches.push(format!("{s1:?} vs {s2:?}: {} != {oracle}", r.p_value));
                }
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        format!(
            "{cases} random cases with n+m <= 10, {} mismatches{}",
            mismatches.len(),
            mismatches.first().map(|m| format!(" (first: {m})")).unwrap_or_default()
        ),
    )
}

fn calibration() -> Outcome {
    const TRIALS: u64 = 200;
    const N: usize = 1000;
    const ITERS: usize = 199;
    let start = Instant::now();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let probs = [0.35, 0.25, 0.2, 0.15, 0.05];
    let categorical = |rng: &mut ChaCha8Rng| -> BTreeMap<u8, u64> {
        let mut counts = BTreeMap::new();
        for _ in 0..N {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut cat = probs.len() - 1;
            for (i, p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    cat = i;
                    break;
                }
            }
            *counts.entry(cat as u8).or_default() += 1;
        }
        counts
    };
    let (mut ks, mut tvd, mut md) = (Vec::new(), Vec::new(), Vec::new());
    for trial in 0..TRIALS {
        let mut rng = stream_rng(41, trial);
        let a: Vec<f64> = (0..N).map(|_| normal.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..N).map(|_| normal.sample(&mut rng)).collect();
        let ha = Histogram::from_sample(&a).unwrap();
        let hb = Histogram::from_sample(&b).unwrap();
        ks.push(ks_two_sample(&ha, &hb, ITERS, trial).unwrap().p_value);
        md.push(
            mean_diff_permutation_test(&a, &b, ITERS, trial, 100_000)
                .unwrap()
                .p_value,
        );
        let (ca, cb) = (categorical(&mut rng), categorical(&mut rng));
        tvd.push(tvd_permutation_test(&ca, &cb, ITERS, trial).unwrap().p_value);
    }
    let elapsed = start.elapsed();
    let d = [
        common::ks_to_uniform(&ks),
        common::ks_to_uniform(&tvd),
        common::ks_to_uniform(&md),
    ];
    let fast = elapsed < Duration::from_secs(120);
    outcome(
        d.iter().all(|&x| x < 0.12) && fast,
        format!(
            "KS to uniform over {TRIALS} trials: two-sample KS {:.3}, TVD {:.3}, mean difference {:.3} (each < 0.12); {:.1}s < 120s",
            d[0],
            d[1],
            d[2],
            elapsed.as_secs_f64()
        ),
    )
}

fn self_comparison() -> Outcome {
    let corpus = common::wiki_corpus(2000);
    let out = compare(&corpus, &corpus, &StopwordSet::english(), &CompareConfig::default()).unwrap();
    let r = &out.report;
    let rows = comparative_rows(r);
    let bad: Vec<_> = rows.iter().filter(|t| t.statistic != 0.0 || t.p_value != 1.0).collect();
    let tvd_zero = r.unigram.tvd_sup == 0.0 && r.unigram.tvd_l1_half == 0.0;
    let buckets = r.type_token.d_p.iter().filter(|b| b.result.is_some()).count();
    let fits_equal = r.rank_frequency.d_ptheta.statistic == r.rank_frequency.d_phat.statistic;
    outcome(
        bad.is_empty() && tvd_zero && buckets > 0 && fits_equal,
        format!(
            "{} comparative rows ({} type-token buckets), {} with D != 0 or p != 1; TVD sup/half-L1 = {}/{}; D_ptheta == D_phat: {fits_equal}",
            rows.len(),
            buckets,
            bad.len(),
            r.unigram.tvd_sup,
            r.unigram.tvd_l1_half
        ),
    )
}

fn sampler_reductions() -> Outcome {
    let model = TrigramModel::train(&common::wiki_corpus(3000)).unwrap();
    let base = SamplerConfig {
        seed: 61,
        ..SamplerConfig::default()
    };
    let text = |config: SamplerConfig| generate_corpus(&model, &config, 500).unwrap().corpus.to_text();
    let random = text(base);
    let nucleus_same = text(SamplerConfig {
        scheme: Scheme::Nucleus,
        nucleus_mass: 1.0,
        ..base
    }) == random;
    let beam_same = text(SamplerConfig {
        scheme: Scheme::Beam,
        beam_size: 1,
        ..base
    }) == random;

    let step = CategoricalStep::new([(2, 0.5), (3, 0.3), (4, 0.2)]).unwrap();
    let t = nucleus_truncate(&step, 0.7);
    let err = (t.probs()[0] - 0.625).abs().max((t.probs()[1] - 0.375).abs());
    let truncate_ok = t.tokens() == [2, 3] && err <= 1e-12;
    outcome(
        nucleus_same && beam_same && truncate_ok,
        format!(
            "500 documents: nucleus n=1 identical: {nucleus_same}, beam k=1 identical: {beam_same}; truncate(0.7) -> {:?} (max err {err:.1e})",
            t.probs()
        ),
    )
}

fn trigram_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for _ in 0..100 {
        let vocab = rng.random_range(1..8u8);
        let mut docs: Vec<Vec<String>> = Vec::new();
        let mut budget = rng.random_range(1..=100usize);
        while budget > 0 {
            let len = rng.random_range(0..=budget.min(12));
            budget -= len.max(1).min(budget);
            docs.push((0..len).map(|_| format!("t{}", rng.random_range(0..vocab))).collect());
        }
        let corpus = Corpus::new(
            docs.iter().map(|d| Document::from_tokens(d.clone()).unwrap()).collect(),
            "fuzz",
        );
        let model = TrigramModel::train(&corpus).unwrap();
        // brute-force trigram counts over padded documents
        let mut tri: HashMap<(String, String, String), u64> = HashMap::new();
        let mut ctx: HashMap<(String, String), u64> = HashMap::new();
        for d in &docs {
            let padded: Vec<String> = ["<BOS>", "<BOS>"]
                .iter()
                .map(|s| s.to_string())
                .chain(d.iter().cloned())
                .chain(["<EOS>".to_string()])
                .collect();
            for w in padded.windows(3) {
                *tri.entry((w[0].clone(), w[1].clone(), w[2].clone())).or_default() += 1;
                *ctx.entry((w[0].clone(), w[1].clone())).or_default() += 1;
            }
        }
        let id = |w: &str| match w {
            "<BOS>" => 0,
            "<EOS>" => 1,
            _ => model.token_id(w).unwrap(),
        };
        for ((a, b, x), c) in &tri {
            let step = model.conditional((id(a), id(b))).unwrap();
            checked += 1;
            if step.prob(id(x)) != *c as f64 / ctx[&(a.clone(), b.clone())] as f64 {
                mismatches += 1;
            }
        }
        if model.context_count() != ctx.len() {
            mismatches += 1;
        }
    }

    let corpus = common::wiki_corpus(3000);
    let model = TrigramModel::train(&corpus).unwrap();
    let target = model.conditional((BOS, BOS)).unwrap();
    let config = SamplerConfig {
        seed: 72,
        ..SamplerConfig::default()
    };
    let generated = generate_corpus(&model, &config, 100_000).unwrap();
    let mut first: HashMap<u32, u64> = HashMap::new();
    for d in generated.corpus.documents() {
        let key = d.tokens().first().map_or(1, |w| model.token_id(w).unwrap());
        *first.entry(key).or_default() += 1;
    }
    let n = generated.corpus.len() as f64;
    let support: HashSet<u32> = target.tokens().iter().copied().chain(first.keys().copied()).collect();
    let (mut sup, mut l1) = (0.0f64, 0.0f64);
    for t in support {
        let d = (first.get(&t).copied().unwrap_or(0) as f64 / n - target.prob(t)).abs();
        sup = sup.max(d);
        l1 += d;
    }
    outcome(
        mismatches == 0 && sup < 0.01,
        format!(
            "{checked} conditionals on 100 fuzzed corpora, {mismatches} mismatches; 1e5 samples vs (BOS,BOS) conditional over {} successors: TVD {sup:.4} < 0.01 (half-L1 {:.4})",
            target.len(),
            l1 / 2.0
        ),
    )
}

const PUNCTUATION: &str = "!\"#%&'()*,-./:;?@[\\]_{}";

fn statistics_oracle() -> Outcome {
    let pool = [
        "the", "of", "and", "a", "cat", "sat", "mat", "dog", "zebra", "ran", ".", ",", "!!", "--", "42", "7", "3.14",
        "$5", "a.b", "x+y", "(", ")", "it's", "on", "under",
    ];
    let stopwords = StopwordSet::english();
    let stop_oracle: HashSet<&str> = ["the", "of", "and", "a", "on", "under", "it's"].into_iter().collect();
    let is_symbol = |t: &str| t.chars().all(|c| c.is_ascii_digit() || PUNCTUATION.contains(c));
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    let mut failures = Vec::new();
    for case in 0..100 {
        let budget = rng.random_range(1..=1000usize);
        let mut docs: Vec<Vec<&str>> = Vec::new();
        let mut used = 0;
        while used < budget {
            let len = rng.random_range(0..=40usize).min(budget - used);
            used += len.max(1);
            docs.push((0..len).map(|_| pool[rng.random_range(0..pool.len())]).collect());
        }
        if docs.iter().all(Vec::is_empty) {
            docs[0].push("the");
        }
        let corpus = Corpus::new(
            docs.iter().map(|d| Document::from_tokens(d.clone()).unwrap()).collect(),
            "fuzz",
        );

        // single pass over every token
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        let mut lengths: BTreeMap<usize, u64> = BTreeMap::new();
        let (mut stop_fr, mut sym_fr) = (Vec::new(), Vec::new());
        let mut total = 0u64;
        for d in &docs {
            *lengths.entry(d.len()).or_default() += 1;
            let (mut s, mut y) = (0, 0);
            for t in d {
                *counts.entry(t).or_default() += 1;
                total += 1;
                if is_symbol(t) {
                    y += 1;
                } else if stop_oracle.contains(t) {
                    s += 1;
                }
            }
            if !d.is_empty() {
                stop_fr.push(s as f64 / d.len() as f64);
                sym_fr.push(y as f64 / d.len() as f64);
            }
        }
        let mut ranked: Vec<(&str, u64)> = counts.iter().map(|(w, c)| (*w, *c)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));

        let table = rank_frequency(&corpus, 10_000).unwrap();
        let rows_ok = table.rows().len() == ranked.len()
            && table
                .rows()
                .iter()
                .zip(&ranked)
                .all(|(r, (w, c))| r.word == *w && r.count == *c);
        let uni = unigram_pmf(&corpus).unwrap();
        let uni_ok = ranked
            .iter()
            .all(|(w, c)| (uni.prob(&w.to_string()) - *c as f64 / total as f64).abs() <= 1e-12);
        let len = length_distribution(&corpus).unwrap();
        let len_ok = lengths
            .iter()
            .all(|(l, c)| (len.prob(l) - *c as f64 / docs.len() as f64).abs() <= 1e-12)
            && len.support().len() == lengths.len();
        let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12);
        let fr_ok = close(
            &fraction_distribution(&corpus, FractionClass::Stopword, &stopwords)
                .unwrap()
                .values,
            &stop_fr,
        ) && close(
            &fraction_distribution(&corpus, FractionClass::Symbol, &stopwords)
                .unwrap()
                .values,
            &sym_fr,
        );

        let mut tt_ok = true;
        for order in [NgramOrder::Unigram, NgramOrder::Bigram] {
            let width = order.as_usize();
            let mut sums: Vec<u64> = Vec::new();
            let mut alive: Vec<u64> = Vec::new();
            for (d, doc) in docs.iter().zip(corpus.documents()) {
                let mut seen: HashSet<&[&str]> = HashSet::new();
                let mut prefix = Vec::new();
                for t in 1..=d.len() {
                    if t >= width {
                        seen.insert(&d[t - width..t]);
                    }
                    prefix.push(seen.len() as u64);
                    if sums.len() < t {
                        sums.push(0);
                        alive.push(0);
                    }
                    sums[t - 1] += seen.len() as u64;
                    alive[t - 1] += 1;
                }
                tt_ok &= prefix_type_counts(doc, order) == prefix;
            }
            let curve = type_token_curve(&corpus, order);
            tt_ok &= curve.len() == sums.len()
                && curve
                    .iter()
                    .zip(sums.iter().zip(&alive))
                    .all(|((t, m), (s, a))| *t >= 1 && (m - *s as f64 / *a as f64).abs() <= 1e-12);
        }
        for (name, ok) in [
            ("rank", rows_ok),
            ("unigram", uni_ok),
            ("length", len_ok),
            ("fractions", fr_ok),
            ("type-token", tt_ok),
        ] {
            if !ok {
                failures.push(format!("case {case}: {name}"));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "100 fuzzed corpora: rank-frequency, unigram, length, stopword/symbol fractions, type-token (orders 1, 2); {} failures{}",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

fn determinism() -> Outcome {
    let corpus = common::wiki_corpus(1500);
    let other = common::wiki_corpus(3000);
    let other = Corpus::new(other.documents()[1500..].to_vec(), "second half");
    let model = TrigramModel::train(&corpus).unwrap();
    let fingerprint = || -> String {
        let mut out = String::new();
        for scheme in [Scheme::Random, Scheme::Nucleus, Scheme::Beam] {
            let config = SamplerConfig {
                scheme,
                seed: 91,
                ..SamplerConfig::default()
            };
            out += &generate_corpus(&model, &config, 300).unwrap().corpus.to_text();
        }
        let lengths = |c: &Corpus| c.documents().iter().map(|d| d.len() as f64).collect::<Vec<_>>();
        let (la, lb) = (lengths(&corpus), lengths(&other));
        let ha = Histogram::from_sample(&la).unwrap();
        let hb = Histogram::from_sample(&lb).unwrap();
        out += &format!("{:?}", ks_two_sample(&ha, &hb, 300, 1).unwrap());
        let table = rank_frequency(&corpus, 10_000).unwrap();
        let fit = fit_zipf_mle(&table).unwrap();
        let ranks = Histogram::from_ranks(&table).unwrap();
        out += &format!(
            "{:?}",
            ks_one_sample(&ranks, &lmstats::fit::zipf_cdf(&fit), 300, 2).unwrap()
        );
        out += &format!("{:?}", mean_diff_permutation_test(&la, &lb, 300, 3, 1000).unwrap());
        let va = lmstats::corpus::vocabulary(&corpus);
        let vb = lmstats::corpus::vocabulary(&other);
        out += &format!(
            "{:?}",
            tvd_permutation_test(va.entries(), vb.entries(), 300, 4).unwrap()
        );
        let oa = lmstats::stats::type_token_observations(&corpus, NgramOrder::Unigram, ObservationMode::Prefix);
        let ob = lmstats::stats::type_token_observations(&other, NgramOrder::Unigram, ObservationMode::Prefix);
        let options = LengthKsOptions {
            mc_iters: 100,
            seed: 5,
            ..LengthKsOptions::default()
        };
        out += &format!(
            "{:?}",
            ks_by_length(&oa, LengthReference::Empirical(&ob), &options).unwrap()
        );
        out += &format!(
            "{:?}",
            summary_stats_bootstrap(&corpus, &StopwordSet::english(), 50, 6).unwrap()
        );
        let config = CompareConfig {
            mc_iters: 200,
            seed: 7,
            ..CompareConfig::default()
        };
        out += &to_json(
            &compare(&corpus, &other, &StopwordSet::english(), &config)
                .unwrap()
                .report,
        )
        .unwrap();
        out
    };
    let runs: Vec<(usize, String)> = [1, 4, 8]
        .into_iter()
        .map(|threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            (threads, pool.install(fingerprint))
        })
        .collect();
    let same = runs.iter().all(|r| r.1 == runs[0].1);
    outcome(
        same,
        format!(
            "generation (3 schemes), one/two-sample KS, TVD, mean difference, per-length KS, bootstrap and full compare report at 1/4/8 threads: identical = {same} ({} bytes)",
            runs[0].1.len()
        ),
    )
}

fn beam_shortening() -> Outcome {
    let corpus = common::wiki_corpus(usize::MAX);
    let model = TrigramModel::train(&corpus).unwrap();
    let mean_len = |scheme| {
        let config = SamplerConfig {
            scheme,
            seed: 101,
            ..SamplerConfig::default()
        };
        let g = generate_corpus(&model, &config, 2000).unwrap();
        g.corpus.total_tokens() as f64 / g.corpus.len() as f64
    };
    let random = mean_len(Scheme::Random);
    let beam = mean_len(Scheme::Beam);
    outcome(
        beam < random,
        format!(
            "trigram on {} documents, 2000 samples each: mean length beam(k=5) {beam:.2} < random {random:.2} (delta {:.2})",
            corpus.len(),
            beam - random
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("Zipf MLE recovery", zipf_recovery),
        ("Heaps MLE recovery", heaps_recovery),
        ("Exact permutation oracle", exact_permutation_oracle),
        ("Test calibration", calibration),
        ("Degenerate self-comparison", self_comparison),
        ("Sampler reductions", sampler_reductions),
        ("Trigram exactness", trigram_exactness),
        ("Statistics oracle equivalence", statistics_oracle),
        ("Determinism under parallelism", determinism),
        ("Beam sampling shortens documents", beam_shortening),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        failed += usize::from(!result.pass);
        println!(
            "{} [{:>2}] {name}: {} ({:.1}s)",
            if result.pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
