//! Distances between distributions and the resampling tests built on them.
//!
//! * KS distance between step cdfs, one-sample (Monte-Carlo draws from the
//!   reference) and two-sample (permutation of the pooled sample).
//! * Total variation distance, reported both as the supremum of pointwise
//!   pmf differences and as half the L1 norm, with a permutation test.
//! * The two-tailed unpaired permutation test for a difference in means,
//!   exhaustive when the number of splits is small.
//! * KS of type counts at fixed prefix lengths.
//!
//! All resampled p-values are `(b + 1) / (B + 1)` where `b` counts resampled
//! statistics at least as extreme as the observed one, so they are never 0.
//! Iteration `i` always draws from the random stream `(seed, i)`; results do
//! not depend on the number of worker threads.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Hypergeometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::fit::{HeapsFit, ParametricCdf};
use crate::rng::{derive_seed, stream_rng};
use crate::stats::{DiscretePmf, RankFrequencyTable, TypeTokenObservation};

pub const DEFAULT_MC_ITERATIONS: usize = 1_000;
pub const MIN_MC_ITERATIONS: usize = 100;
pub const DEFAULT_MIN_BUCKET: usize = 30;
pub const DEFAULT_EXHAUSTIVE_THRESHOLD: u64 = 100_000;

/// Slack when comparing resampled statistics in [0, 1] against the observed
/// one, so that mathematically equal values count as ties.
const UNIT_TIE_TOLERANCE: f64 = 1e-12;

/// A right-continuous step cdf given by its jump points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCdf {
    knots: Vec<f64>,
    cumulative: Vec<f64>,
    /// Sample size, or total weight for weighted samples.
    weight: f64,
}

impl StepCdf {
    pub fn from_sample(sample: &[f64]) -> Result<Self> {
        Ok(Self::from_histogram(&Histogram::from_sample(sample)?))
    }

    /// Empirical cdf of a (possibly weighted) sample.
    pub fn from_histogram(h: &Histogram) -> Self {
        let n = h.total as f64;
        let mut acc = 0u64;
        let cumulative = h
            .counts
            .iter()
            .map(|&c| {
                acc += c;
                acc as f64 / n
            })
            .collect();
        StepCdf {
            knots: h.values.clone(),
            cumulative,
            weight: n,
        }
    }

    pub fn from_parametric(reference: &ParametricCdf) -> Self {
        let (knots, cumulative) = reference.cdf_values();
        StepCdf {
            knots,
            cumulative,
            weight: f64::INFINITY,
        }
    }

    pub fn evaluate(&self, y: f64) -> f64 {
        match self.knots.partition_point(|k| *k <= y) {
            0 => 0.0,
            i => self.cumulative[i - 1],
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// A sample stored as counts over its distinct values, in increasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    values: Vec<f64>,
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    pub fn from_sample(sample: &[f64]) -> Result<Self> {
        Self::from_pairs(sample.iter().map(|&v| (v, 1)))
    }

    /// Merges `(value, count)` pairs; zero counts are dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, u64)>) -> Result<Self> {
        let mut pairs: Vec<(f64, u64)> = pairs.into_iter().filter(|p| p.1 > 0).collect();
        if pairs.iter().any(|p| p.0.is_nan()) {
            return Err(Error::UnorderableValue);
        }
        if pairs.is_empty() {
            return Err(Error::EmptySample);
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values: Vec<f64> = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        for (v, c) in pairs {
            // 0.0 and -0.0 are the same observation
            if values.last() == Some(&v) {
                *counts.last_mut().unwrap() += c;
            } else {
                values.push(v);
                counts.push(c);
            }
        }
        let total = counts.iter().sum();
        Ok(Histogram { values, counts, total })
    }

    /// Token occurrences as a sample of ranks: rank k appears count(w_k) times.
    pub fn from_ranks(table: &RankFrequencyTable) -> Result<Self> {
        Self::from_pairs(table.rows().iter().map(|r| (r.rank as f64, r.count)))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// `sup_y |F1(y) - F2(y)|`, evaluated over the union of jump points.
pub fn ks_distance(f1: &StepCdf, f2: &StepCdf) -> Result<f64> {
    if f1.knots.is_empty() || f2.knots.is_empty() {
        return Err(Error::EmptySample);
    }
    let (mut i, mut j) = (0, 0);
    let (mut a, mut b) = (0.0f64, 0.0f64);
    let mut d = 0.0f64;
    while i < f1.knots.len() || j < f2.knots.len() {
        let x = match (f1.knots.get(i), f2.knots.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < f1.knots.len() && f1.knots[i] <= x {
            a = f1.cumulative[i];
            i += 1;
        }
        while j < f2.knots.len() && f2.knots[j] <= x {
            b = f2.cumulative[j];
            j += 1;
        }
        d = d.max((a - b).abs());
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KsVariant {
    OneSample,
    TwoSample,
}

/// What the candidate sample is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReferenceKind {
    /// Parametric law fitted on the candidate sample itself (D_pθ).
    #[serde(rename = "D_ptheta")]
    ModelFit,
    /// Parametric law fitted on the reference corpus (D_p̂).
    #[serde(rename = "D_phat")]
    ReferenceFit,
    /// Empirical cdf of the reference corpus (D_p).
    #[serde(rename = "D_p")]
    Empirical,
}

/// Mean, spread and maximum of a resampled null distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullSummary {
    pub mean: f64,
    pub sd: f64,
    pub max: f64,
}

impl NullSummary {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        NullSummary {
            mean,
            sd: var.sqrt(),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub mc_iterations: usize,
    pub seed: u64,
    pub variant: KsVariant,
    pub reference: ReferenceKind,
    pub n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    pub null: NullSummary,
}

impl KsResult {
    pub fn labelled(mut self, reference: ReferenceKind) -> Self {
        self.reference = reference;
        self
    }
}

fn check_iterations(iters: usize) -> Result<()> {
    if iters < MIN_MC_ITERATIONS {
        return Err(Error::TooFewIterations {
            requested: iters,
            minimum: MIN_MC_ITERATIONS,
        });
    }
    Ok(())
}

/// Runs `iters` independent resampling iterations, each on its own stream.
fn resample<F>(iters: usize, seed: u64, f: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    (0..iters)
        .into_par_iter()
        .map(|i| f(&mut stream_rng(seed, i as u64)))
        .collect()
}

fn smoothed_p(null: &[f64], observed: f64, tol: f64) -> f64 {
    let extreme = null.iter().filter(|&&d| d >= observed - tol).count();
    (extreme + 1) as f64 / (null.len() + 1) as f64
}

/// Multinomial counts for `n` draws over categories with probabilities
/// `probs`, by sequential conditional binomials.
fn multinomial(n: u64, probs: &[f64], rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut out = vec![0u64; probs.len()];
    let mut remaining = n;
    let mut mass = 1.0f64;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() {
            out[i] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 1.0 };
        let x = if q >= 1.0 {
            remaining
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining, q).expect("valid binomial").sample(rng)
        };
        out[i] = x;
        remaining -= x;
        mass -= p;
    }
    out
}

/// Categories up to this size are split item by item rather than through a
/// hypergeometric sampler, whose setup cost dominates for small counts.
const SEQUENTIAL_SPLIT_MAX: u64 = 256;

/// A uniformly random split of pooled category counts: how many of `draw`
/// items taken without replacement fall in each category (multivariate
/// hypergeometric, by sequential conditionals).
fn split_counts(pooled: &[u64], draw: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut out = vec![0u64; pooled.len()];
    let mut pool_left: u64 = pooled.iter().sum();
    let mut draw_left = draw;
    for (i, &c) in pooled.iter().enumerate() {
        if draw_left == 0 {
            break;
        }
        let x = if c == pool_left || draw_left == pool_left {
            c.min(draw_left)
        } else if c == 0 {
            0
        } else if c <= SEQUENTIAL_SPLIT_MAX {
            // draw the c marked items one at a time
            let (mut pool, mut left, mut x) = (pool_left, draw_left, 0);
            for _ in 0..c {
                if rng.random::<f64>() * (pool as f64) < left as f64 {
                    x += 1;
                    left -= 1;
                }
                pool -= 1;
            }
            x
        } else {
            hypergeometric(pool_left, c, draw_left, rng)
        };
        out[i] = x;
        draw_left -= x;
        pool_left -= c;
    }
    out
}

/// Successes in `draw` items taken without replacement from `total` items
/// of which `marked` are successes.
fn hypergeometric(total: u64, marked: u64, draw: u64, rng: &mut ChaCha8Rng) -> u64 {
    match Hypergeometric::new(total, marked, draw) {
        Ok(d) => d.sample(rng),
        // the library's inversion branch underflows for some huge populations
        Err(_) => hypergeometric_from_mode(total, marked, draw, rng),
    }
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Exact inversion over the support visited outward from the mode, with
/// the pmf carried by its ratio recurrence.
fn hypergeometric_from_mode(total: u64, marked: u64, draw: u64, rng: &mut ChaCha8Rng) -> u64 {
    let lo = draw.saturating_sub(total - marked);
    let hi = draw.min(marked);
    let mode = (((draw + 1) as f64 * (marked + 1) as f64 / (total + 2) as f64).floor() as u64).clamp(lo, hi);
    let pmf_mode = (ln_choose(marked, mode) + ln_choose(total - marked, draw - mode) - ln_choose(total, draw)).exp();
    // f(x+1)/f(x) = (K-x)(n-x) / ((x+1)(N-K-n+x+1))
    let up =
        |x: u64| (marked - x) as f64 * (draw - x) as f64 / ((x + 1) as f64 * (total - marked - draw + x + 1) as f64);
    let mut u: f64 = rng.random::<f64>() - pmf_mode;
    if u < 0.0 {
        return mode;
    }
    let (mut above, mut below) = (mode, mode);
    let (mut p_above, mut p_below) = (pmf_mode, pmf_mode);
    loop {
        let can_up = above < hi;
        let can_down = below > lo;
        if !can_up && !can_down {
            return mode;
        }
        if can_up {
            p_above *= up(above);
            above += 1;
            u -= p_above;
            if u < 0.0 {
                return above;
            }
        }
        if can_down {
            p_below /= up(below - 1);
            below -= 1;
            u -= p_below;
            if u < 0.0 {
                return below;
            }
        }
    }
}

/// max_j |C1_j/n1 - C2_j/n2| for count vectors over a shared ordered support.
fn ks_from_counts(c1: &[u64], n1: u64, c2: &[u64], n2: u64) -> f64 {
    let (mut a, mut b) = (0u64, 0u64);
    let mut d = 0.0f64;
    for (x, y) in c1.iter().zip(c2) {
        a += x;
        b += y;
        d = d.max((a as f64 / n1 as f64 - b as f64 / n2 as f64).abs());
    }
    d
}

/// One-sample KS against a fully specified discrete reference, with a
/// Monte-Carlo p-value from same-size samples drawn from the reference.
pub fn ks_one_sample(sample: &Histogram, reference: &ParametricCdf, mc_iters: usize, seed: u64) -> Result<KsResult> {
    check_iterations(mc_iters)?;
    let mass = reference.mass();
    if !((mass - 1.0).abs() < 1e-9) {
        return Err(Error::NotNormalized { mass });
    }
    let reference_cdf = StepCdf::from_parametric(reference);
    let observed = ks_distance(&StepCdf::from_histogram(sample), &reference_cdf)?;
    let (_, probs) = reference.pmf();
    let n = sample.total();
    let null = resample(mc_iters, seed, |rng| {
        let counts = multinomial(n, &probs, rng);
        let mut acc = 0u64;
        counts
            .iter()
            .zip(reference_cdf.cumulative())
            .map(|(c, f)| {
                acc += c;
                (acc as f64 / n as f64 - f).abs()
            })
            .fold(0.0, f64::max)
    });
    Ok(KsResult {
        statistic: observed,
        p_value: smoothed_p(&null, observed, UNIT_TIE_TOLERANCE),
        mc_iterations: mc_iters,
        seed,
        variant: KsVariant::OneSample,
        reference: ReferenceKind::ReferenceFit,
        n,
        m: None,
        null: NullSummary::of(&null),
    })
}

/// Aligns two histograms on the union of their values.
fn align(h1: &Histogram, h2: &Histogram) -> (Vec<u64>, Vec<u64>) {
    let (mut i, mut j) = (0, 0);
    let (mut c1, mut c2) = (Vec::new(), Vec::new());
    while i < h1.values.len() || j < h2.values.len() {
        let take1 = j >= h2.values.len() || (i < h1.values.len() && h1.values[i] <= h2.values[j]);
        let take2 = i >= h1.values.len() || (j < h2.values.len() && h2.values[j] <= h1.values[i]);
        c1.push(if take1 { h1.counts[i] } else { 0 });
        c2.push(if take2 { h2.counts[j] } else { 0 });
        i += usize::from(take1);
        j += usize::from(take2);
    }
    (c1, c2)
}

/// Two-sample KS with a permutation p-value: the pooled sample is re-split
/// into the original sizes `mc_iters` times.
pub fn ks_two_sample(s1: &Histogram, s2: &Histogram, mc_iters: usize, seed: u64) -> Result<KsResult> {
    check_iterations(mc_iters)?;
    let (c1, c2) = align(s1, s2);
    let (n1, n2) = (s1.total(), s2.total());
    let observed = ks_from_counts(&c1, n1, &c2, n2);
    let pooled: Vec<u64> = c1.iter().zip(&c2).map(|(a, b)| a + b).collect();
    let null = resample(mc_iters, seed, |rng| {
        let first = split_counts(&pooled, n1, rng);
        let second: Vec<u64> = pooled.iter().zip(&first).map(|(p, f)| p - f).collect();
        ks_from_counts(&first, n1, &second, n2)
    });
    Ok(KsResult {
        statistic: observed,
        p_value: smoothed_p(&null, observed, UNIT_TIE_TOLERANCE),
        mc_iterations: mc_iters,
        seed,
        variant: KsVariant::TwoSample,
        reference: ReferenceKind::Empirical,
        n: n1,
        m: Some(n2),
        null: NullSummary::of(&null),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvdDistance {
    /// sup_y |p1(y) - p2(y)|
    pub sup: f64,
    /// (1/2) sum_y |p1(y) - p2(y)|
    pub half_l1: f64,
}

fn tvd_from_pairs(pairs: impl Iterator<Item = (f64, f64)>) -> TvdDistance {
    let (mut sup, mut l1) = (0.0f64, 0.0f64);
    for (a, b) in pairs {
        let d = (a - b).abs();
        sup = sup.max(d);
        l1 += d;
    }
    TvdDistance {
        sup,
        half_l1: (0.5 * l1).min(1.0),
    }
}

/// Both TVD forms over the union of supports (missing keys have mass 0).
pub fn tvd<K: Ord + Clone>(p1: &DiscretePmf<K>, p2: &DiscretePmf<K>) -> TvdDistance {
    let mut merged: BTreeMap<&K, (f64, f64)> = BTreeMap::new();
    for (k, p) in p1.iter() {
        merged.entry(k).or_default().0 = p;
    }
    for (k, p) in p2.iter() {
        merged.entry(k).or_default().1 = p;
    }
    tvd_from_pairs(merged.into_values())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvdResult {
    pub tvd_sup: f64,
    pub tvd_l1_half: f64,
    /// p-value of the sup form
    pub p_value: f64,
    pub p_value_l1_half: f64,
    pub iterations: usize,
    pub seed: u64,
    pub n: u64,
    pub m: u64,
    /// Resampled distribution of the sup form.
    pub null: NullSummary,
}

fn tvd_from_counts(c1: &[u64], n1: u64, c2: &[u64], n2: u64) -> TvdDistance {
    tvd_from_pairs(
        c1.iter()
            .zip(c2)
            .map(|(&a, &b)| (a as f64 / n1 as f64, b as f64 / n2 as f64)),
    )
}

/// TVD between two categorical samples (given as counts per category) with
/// a permutation null distribution.
pub fn tvd_permutation_test<K: Ord>(
    s1: &BTreeMap<K, u64>,
    s2: &BTreeMap<K, u64>,
    iters: usize,
    seed: u64,
) -> Result<TvdResult> {
    check_iterations(iters)?;
    let mut merged: BTreeMap<&K, (u64, u64)> = BTreeMap::new();
    for (k, &c) in s1 {
        merged.entry(k).or_default().0 += c;
    }
    for (k, &c) in s2 {
        merged.entry(k).or_default().1 += c;
    }
    let (c1, c2): (Vec<u64>, Vec<u64>) = merged.into_values().unzip();
    let (n1, n2) = (c1.iter().sum::<u64>(), c2.iter().sum::<u64>());
    if n1 == 0 || n2 == 0 {
        return Err(Error::EmptySample);
    }
    let observed = tvd_from_counts(&c1, n1, &c2, n2);
    let pooled: Vec<u64> = c1.iter().zip(&c2).map(|(a, b)| a + b).collect();
    let null: Vec<(f64, f64)> = (0..iters)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let first = split_counts(&pooled, n1, &mut rng);
            let second: Vec<u64> = pooled.iter().zip(&first).map(|(p, f)| p - f).collect();
            let d = tvd_from_counts(&first, n1, &second, n2);
            (d.sup, d.half_l1)
        })
        .collect();
    let (null_sup, null_l1): (Vec<f64>, Vec<f64>) = null.into_iter().unzip();
    Ok(TvdResult {
        tvd_sup: observed.sup,
        tvd_l1_half: observed.half_l1,
        p_value: smoothed_p(&null_sup, observed.sup, UNIT_TIE_TOLERANCE),
        p_value_l1_half: smoothed_p(&null_l1, observed.half_l1, UNIT_TIE_TOLERANCE),
        iterations: iters,
        seed,
        n: n1,
        m: n2,
        null: NullSummary::of(&null_sup),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationResult {
    /// mean(s1) - mean(s2)
    pub statistic: f64,
    /// Statistic minus the mean of the permutation distribution.
    pub centered_statistic: f64,
    pub p_value: f64,
    pub permutations: u64,
    pub exhaustive: bool,
    pub seed: u64,
    pub null: NullSummary,
}

/// C(n, k), or `None` when it does not fit in a u64.
pub fn binomial_coefficient(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

fn mean_diff(pool: &[f64], first: &[usize], in_first: &[bool]) -> f64 {
    let n = first.len();
    let m = pool.len() - n;
    let s1: f64 = first.iter().map(|&i| pool[i]).sum();
    let s2: f64 = pool.iter().zip(in_first).filter(|(_, &f)| !f).map(|(x, _)| x).sum();
    s1 / n as f64 - s2 / m as f64
}

/// Ties within this distance of the observed |statistic| count as extreme.
pub fn mean_diff_tie_tolerance(pool: &[f64]) -> f64 {
    1e-9 * pool.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Two-tailed unpaired permutation test for `mean(s1) - mean(s2)`.
///
/// The permutation distribution holds the statistic for every split of the
/// pooled data into groups of the original sizes when there are at most
/// `exhaustive_threshold` such splits, and for `iters` random splits
/// otherwise. Statistic and distribution are centered on the mean of the
/// full permutation distribution (the enumerated mean when exhaustive; in
/// Monte-Carlo mode its exact value, 0), and the p-value is the fraction of
/// centered permuted statistics whose magnitude reaches the centered
/// observed magnitude. Monte-Carlo p-values are add-one smoothed.
pub fn mean_diff_permutation_test(
    s1: &[f64],
    s2: &[f64],
    iters: usize,
    seed: u64,
    exhaustive_threshold: u64,
) -> Result<PermutationResult> {
    if s1.is_empty() || s2.is_empty() {
        return Err(Error::EmptySample);
    }
    if s1.iter().chain(s2).any(|x| !x.is_finite()) {
        return Err(Error::UnorderableValue);
    }
    let pool: Vec<f64> = s1.iter().chain(s2).copied().collect();
    let (n, total) = (s1.len(), pool.len());
    let stat = crate::stats::mean(s1) - crate::stats::mean(s2);
    let tol = mean_diff_tie_tolerance(&pool);
    let splits = binomial_coefficient(total as u64, n as u64);

    if let Some(count) = splits.filter(|&c| c <= exhaustive_threshold) {
        let mut dist = Vec::with_capacity(count as usize);
        let mut comb: Vec<usize> = (0..n).collect();
        let mut in_first = vec![false; total];
        loop {
            in_first.iter_mut().for_each(|f| *f = false);
            comb.iter().for_each(|&i| in_first[i] = true);
            dist.push(mean_diff(&pool, &comb, &in_first));
            // next combination in lexicographic order
            let mut i = n;
            while i > 0 && comb[i - 1] == total - n + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            comb[i - 1] += 1;
            for j in i..n {
                comb[j] = comb[j - 1] + 1;
            }
        }
        let center = dist.iter().sum::<f64>() / dist.len() as f64;
        let centered_stat = stat - center;
        let extreme = dist
            .iter()
            .filter(|d| (*d - center).abs() >= centered_stat.abs() - tol)
            .count();
        return Ok(PermutationResult {
            statistic: stat,
            centered_statistic: centered_stat,
            p_value: extreme as f64 / dist.len() as f64,
            permutations: count,
            exhaustive: true,
            seed,
            null: NullSummary::of(&dist),
        });
    }

    check_iterations(iters)?;
    let pool_sum: f64 = pool.iter().sum();
    let m = total - n;
    let dist = resample(iters, seed, |rng| {
        let mut picked = index::sample(rng, total, n).into_vec();
        picked.sort_unstable();
        let s: f64 = picked.iter().map(|&i| pool[i]).sum();
        s / n as f64 - (pool_sum - s) / m as f64
    });
    let extreme = dist.iter().filter(|d| d.abs() >= stat.abs() - tol).count();
    Ok(PermutationResult {
        statistic: stat,
        centered_statistic: stat,
        p_value: (extreme + 1) as f64 / (iters + 1) as f64,
        permutations: iters as u64,
        exhaustive: false,
        seed,
        null: NullSummary::of(&dist),
    })
}

/// Reference for the per-length type-token comparison.
#[derive(Debug, Clone, Copy)]
pub enum LengthReference<'a> {
    /// Prefix observations of a reference corpus (two-sample, D_p).
    Empirical(&'a [TypeTokenObservation]),
    /// Poisson(alpha t^beta) from a fitted law (one-sample).
    Fit(&'a HeapsFit, ReferenceKind),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthKsOptions {
    pub grid: Vec<u64>,
    pub min_bucket: usize,
    pub mc_iters: usize,
    pub seed: u64,
}

impl Default for LengthKsOptions {
    fn default() -> Self {
        LengthKsOptions {
            grid: default_length_grid(),
            min_bucket: DEFAULT_MIN_BUCKET,
            mc_iters: DEFAULT_MC_ITERATIONS,
            seed: 0,
        }
    }
}

/// t in {10, 20, ..., 500}.
pub fn default_length_grid() -> Vec<u64> {
    (1..=50).map(|i| i * 10).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthKs {
    pub t: u64,
    pub n_candidate: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_reference: Option<usize>,
    /// `None` when a side had fewer than `min_bucket` observations.
    pub result: Option<KsResult>,
}

fn bucket_values(obs: &[TypeTokenObservation]) -> BTreeMap<u64, Vec<f64>> {
    let mut out: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for o in obs {
        out.entry(o.length).or_default().push(o.types as f64);
    }
    out
}

/// KS of the type-count distribution at each prefix length in the grid.
/// Lengths beyond the longest candidate prefix are dropped; under-populated
/// buckets are kept with `result = None`.
pub fn ks_by_length(
    candidate: &[TypeTokenObservation],
    reference: LengthReference<'_>,
    options: &LengthKsOptions,
) -> Result<Vec<LengthKs>> {
    let cand = bucket_values(candidate);
    let max_t = cand.keys().next_back().copied().unwrap_or(0);
    let refs = match reference {
        LengthReference::Empirical(obs) => Some(bucket_values(obs)),
        LengthReference::Fit(..) => None,
    };
    let mut out = Vec::new();
    for &t in options.grid.iter().filter(|&&t| t >= 1 && t <= max_t) {
        let xs = cand.get(&t).map(Vec::as_slice).unwrap_or(&[]);
        let seed = derive_seed(options.seed, t);
        let (n_reference, result) = match (&refs, reference) {
            (Some(refs), _) => {
                let ys = refs.get(&t).map(Vec::as_slice).unwrap_or(&[]);
                let result = if xs.len() >= options.min_bucket && ys.len() >= options.min_bucket {
                    let r = ks_two_sample(
                        &Histogram::from_sample(xs)?,
                        &Histogram::from_sample(ys)?,
                        options.mc_iters,
                        seed,
                    )?;
                    Some(r)
                } else {
                    None
                };
                (Some(ys.len()), result)
            }
            (None, LengthReference::Fit(fit, kind)) => {
                let result = if xs.len() >= options.min_bucket {
                    let r = ks_one_sample(
                        &Histogram::from_sample(xs)?,
                        &fit.reference_at(t),
                        options.mc_iters,
                        seed,
                    )?;
                    Some(r.labelled(kind))
                } else {
                    None
                };
                (None, result)
            }
            (None, LengthReference::Empirical(_)) => unreachable!(),
        };
        out.push(LengthKs {
            t,
            n_candidate: xs.len(),
            n_reference,
            result,
        });
    }
    Ok(out)
}

/// `t,D,p` rows; skipped buckets have empty `D` and `p`.
pub fn length_ks_to_csv(rows: &[LengthKs]) -> String {
    let mut out = String::from("t,D,p\n");
    for r in rows {
        match &r.result {
            Some(k) => out.push_str(&format!("{},{},{}\n", r.t, k.statistic, k.p_value)),
            None => out.push_str(&format!("{},,\n", r.t)),
        }
    }
    out
}
