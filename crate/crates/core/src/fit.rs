//! Maximum-likelihood fits of Zipf's rank-frequency law and of Heaps' law
//! framed as a non-homogeneous Poisson process, plus the parametric cdfs
//! used as KS references.
//!
//! The Zipf normalizer is always the generalized harmonic number over the
//! ranks actually kept, `H(K, s) = sum_{k=1..K} k^-s`, so every `s >= 0` is
//! admissible. Both profile likelihoods are concave in their single free
//! parameter; a coarse grid locates the peak and golden-section search
//! refines it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::stats::{DiscretePmf, NgramOrder, RankFrequencyTable, TypeTokenObservation};

pub const ZIPF_BRACKET: (f64, f64) = (0.0, 5.0);
pub const HEAPS_BETA_BRACKET: (f64, f64) = (0.0, 1.5);
pub const PARAM_TOLERANCE: f64 = 1e-6;

/// Upper-tail mass discarded when tabulating a Poisson pmf.
const POISSON_TAIL: f64 = 1e-13;

/// Maximizes a unimodal function on `[lo, hi]`: grid scan, then
/// golden-section inside the cell pair around the best grid point. The
/// endpoints are compared at the end so boundary optima come back exactly.
fn maximize_unimodal<F>(f: F, lo: f64, hi: f64, tol: f64, parameter: &'static str) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    const GRID: usize = 64;
    let eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_nan() || v == f64::INFINITY {
            Err(Error::NonFiniteLikelihood { parameter, value: x })
        } else {
            Ok(v)
        }
    };
    let step = (hi - lo) / GRID as f64;
    let mut best = (lo, eval(lo)?);
    let mut best_i = 0;
    for i in 1..=GRID {
        let x = if i == GRID { hi } else { lo + step * i as f64 };
        let v = eval(x)?;
        if v > best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
    }
    let x = 0.5 * (a + b);
    let mut out = (x, eval(x)?);
    for edge in [lo, hi] {
        let v = eval(edge)?;
        if v >= out.1 {
            out = (edge, v);
        }
    }
    if out.1 == f64::NEG_INFINITY {
        return Err(Error::NonFiniteLikelihood {
            parameter,
            value: out.0,
        });
    }
    Ok(out)
}

/// `sum_{k=1..K} k^-s`.
pub fn generalized_harmonic(max_rank: usize, s: f64) -> f64 {
    (1..=max_rank).map(|k| (k as f64).powf(-s)).sum()
}

struct ZipfObjective {
    ln_rank: Vec<f64>,
    total: f64,
    /// sum_k c_k ln k
    weighted_log_rank: f64,
}

impl ZipfObjective {
    fn new(table: &RankFrequencyTable) -> Self {
        let ln_rank: Vec<f64> = (1..=table.len()).map(|k| (k as f64).ln()).collect();
        let weighted_log_rank = table.rows().iter().zip(&ln_rank).map(|(r, l)| r.count as f64 * l).sum();
        ZipfObjective {
            ln_rank,
            total: table.total() as f64,
            weighted_log_rank,
        }
    }

    fn normalizer(&self, s: f64) -> f64 {
        self.ln_rank.iter().map(|l| (-s * l).exp()).sum()
    }

    fn loglik(&self, s: f64) -> f64 {
        -self.total * self.normalizer(s).ln() - s * self.weighted_log_rank
    }
}

/// Log-likelihood of the rank-frequency table under a Zipf law truncated at
/// the table length: `-T ln H(K, s) - s sum_k c_k ln k`.
pub fn zipf_loglik(table: &RankFrequencyTable, s: f64) -> f64 {
    ZipfObjective::new(table).loglik(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipfFit {
    pub s: f64,
    /// Truncation point K (number of ranks in the fitted table).
    pub max_rank: usize,
    pub loglik: f64,
    /// H(K, s)
    pub normalizer: f64,
    pub n_tokens: u64,
    /// The optimum sits on the edge of the search bracket.
    pub at_boundary: bool,
}

pub fn fit_zipf_mle(table: &RankFrequencyTable) -> Result<ZipfFit> {
    fit_zipf_mle_in(table, ZIPF_BRACKET)
}

pub fn fit_zipf_mle_in(table: &RankFrequencyTable, bracket: (f64, f64)) -> Result<ZipfFit> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let (lo, hi) = bracket;
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad Zipf bracket [{lo}, {hi}]")));
    }
    let objective = ZipfObjective::new(table);
    let counts = table.counts();
    let uniform = counts.iter().all(|&c| c == counts[0]);
    let (s, loglik) = if uniform {
        // flat likelihood for K = 1; maximized at s = 0 otherwise
        (lo, objective.loglik(lo))
    } else {
        maximize_unimodal(|s| objective.loglik(s), lo, hi, PARAM_TOLERANCE, "s")?
    };
    Ok(ZipfFit {
        s,
        max_rank: table.len(),
        loglik,
        normalizer: objective.normalizer(s),
        n_tokens: table.total(),
        at_boundary: s == lo || s == hi,
    })
}

pub fn zipf_cdf(fit: &ZipfFit) -> ParametricCdf {
    ParametricCdf::Zipf {
        s: fit.s,
        max_rank: fit.max_rank,
    }
}

/// A fully specified discrete reference distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParametricCdf {
    /// Ranks 1..=max_rank with mass proportional to k^-s.
    Zipf { s: f64, max_rank: usize },
    /// Poisson counts, tabulated until the remaining tail is negligible.
    Poisson { lambda: f64 },
    /// Arbitrary finite pmf on increasing support values.
    Discrete { values: Vec<f64>, probs: Vec<f64> },
}

impl ParametricCdf {
    /// Support values (increasing) and their probabilities.
    pub fn pmf(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            ParametricCdf::Zipf { s, max_rank } => {
                let weights: Vec<f64> = (1..=*max_rank).map(|k| (k as f64).powf(-s)).collect();
                let h: f64 = weights.iter().sum();
                let values = (1..=*max_rank).map(|k| k as f64).collect();
                (values, weights.into_iter().map(|w| w / h).collect())
            }
            ParametricCdf::Poisson { lambda } => {
                let (ks, probs) = poisson_table(*lambda);
                (ks.into_iter().map(|k| k as f64).collect(), probs)
            }
            ParametricCdf::Discrete { values, probs } => (values.clone(), probs.clone()),
        }
    }

    /// Cumulative probabilities aligned with [`ParametricCdf::pmf`]'s support.
    /// The last entry is exactly 1.
    pub fn cdf_values(&self) -> (Vec<f64>, Vec<f64>) {
        let (values, probs) = self.pmf();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        (values, cdf)
    }

    /// Right-continuous cdf evaluated at `y`.
    pub fn evaluate(&self, y: f64) -> f64 {
        let (values, cdf) = self.cdf_values();
        match values.partition_point(|v| *v <= y) {
            0 => 0.0,
            i => cdf[i - 1],
        }
    }

    /// Total mass of the pmf; 1 for a valid reference.
    pub fn mass(&self) -> f64 {
        self.pmf().1.iter().sum()
    }
}

/// Poisson(lambda) probabilities on a contiguous range of counts holding
/// all but a negligible amount of mass, renormalized to sum to 1.
fn poisson_table(lambda: f64) -> (Vec<u64>, Vec<f64>) {
    if lambda <= 0.0 {
        return (vec![0], vec![1.0]);
    }
    let log_p = |k: u64| k as f64 * lambda.ln() - lambda - ln_gamma(k as f64 + 1.0);
    let mode = lambda.floor() as u64;
    // below the mode, p(j-1)/p(j) = j/lambda <= k/lambda bounds the lower tail
    let mut lo = mode;
    while lo > 0 {
        let k = lo - 1;
        let bound = log_p(k).exp() / (1.0 - k as f64 / lambda);
        if bound < POISSON_TAIL {
            break;
        }
        lo = k;
    }
    let mut ks = Vec::new();
    let mut probs = Vec::new();
    let mut k = lo;
    loop {
        let p = log_p(k).exp();
        ks.push(k);
        probs.push(p);
        let next = k + 1;
        if next as f64 > lambda {
            let p_next = log_p(next).exp();
            let bound = p_next / (1.0 - lambda / (next as f64 + 1.0));
            if bound < POISSON_TAIL {
                break;
            }
        }
        k = next;
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    (ks, probs)
}

/// Pmf over type counts for a document of length `t` under the fitted NHPP.
pub fn nhpp_pmf(fit: &HeapsFit, t: u64) -> Result<DiscretePmf<u64>> {
    if t == 0 {
        return Err(Error::InvalidParameter("length must be at least 1".into()));
    }
    let (ks, probs) = poisson_table(fit.rate(t));
    DiscretePmf::from_weights(ks.into_iter().zip(probs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeapsFit {
    pub alpha: f64,
    pub beta: f64,
    pub loglik: f64,
    pub n_obs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<NgramOrder>,
    /// The optimum sits on the edge of the beta bracket.
    pub at_boundary: bool,
}

impl HeapsFit {
    /// lambda(t) = alpha * t^beta
    pub fn rate(&self, t: u64) -> f64 {
        self.alpha * (t as f64).powf(self.beta)
    }

    pub fn reference_at(&self, t: u64) -> ParametricCdf {
        ParametricCdf::Poisson { lambda: self.rate(t) }
    }
}

struct HeapsData {
    ln_t: Vec<f64>,
    types: Vec<f64>,
    sum_types: f64,
    /// sum_i k_i ln t_i
    sum_types_ln_t: f64,
    /// sum_i ln(k_i!)
    sum_ln_fact: f64,
}

impl HeapsData {
    fn new(obs: &[TypeTokenObservation]) -> Result<Self> {
        if let Some(o) = obs.iter().find(|o| o.length == 0) {
            return Err(Error::InvalidParameter(format!(
                "observation has zero length ({} types)",
                o.types
            )));
        }
        let ln_t: Vec<f64> = obs.iter().map(|o| (o.length as f64).ln()).collect();
        let types: Vec<f64> = obs.iter().map(|o| o.types as f64).collect();
        Ok(HeapsData {
            sum_types: types.iter().sum(),
            sum_types_ln_t: types.iter().zip(&ln_t).map(|(k, l)| k * l).sum(),
            sum_ln_fact: types.iter().map(|k| ln_gamma(k + 1.0)).sum(),
            ln_t,
            types,
        })
    }

    fn sum_rate_base(&self, beta: f64) -> f64 {
        self.ln_t.iter().map(|l| (beta * l).exp()).sum()
    }

    fn loglik(&self, alpha: f64, beta: f64) -> f64 {
        self.sum_types * alpha.ln() + beta * self.sum_types_ln_t - self.sum_ln_fact - alpha * self.sum_rate_base(beta)
    }

    fn profile_alpha(&self, beta: f64) -> f64 {
        self.sum_types / self.sum_rate_base(beta)
    }
}

/// `sum_i [k_i (ln alpha + beta ln t_i) - ln k_i! - alpha t_i^beta]`.
pub fn heaps_loglik(obs: &[TypeTokenObservation], alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let data = HeapsData::new(obs)?;
    // k ln alpha is 0 when k = 0 even though the product form would also be fine
    Ok(data.loglik(alpha, beta))
}

/// Analytic gradient `(dL/dalpha, dL/dbeta)` of [`heaps_loglik`].
pub fn heaps_gradient(obs: &[TypeTokenObservation], alpha: f64, beta: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let data = HeapsData::new(obs)?;
    let (mut s_rate, mut s_rate_ln) = (0.0, 0.0);
    for l in &data.ln_t {
        let r = (beta * l).exp();
        s_rate += r;
        s_rate_ln += r * l;
    }
    let d_alpha = data.sum_types / alpha - s_rate;
    let d_beta = data.sum_types_ln_t - alpha * s_rate_ln;
    Ok((d_alpha, d_beta))
}

/// The alpha that zeroes dL/dalpha for a given beta: `sum k / sum t^beta`.
pub fn profile_alpha(obs: &[TypeTokenObservation], beta: f64) -> Result<f64> {
    Ok(HeapsData::new(obs)?.profile_alpha(beta))
}

pub fn fit_heaps_mle(obs: &[TypeTokenObservation]) -> Result<HeapsFit> {
    if obs.len() < 2 {
        return Err(Error::Underdetermined("need at least two observations".into()));
    }
    if obs.iter().all(|o| o.length == obs[0].length) {
        return Err(Error::Underdetermined(
            "all observations share one length, so beta is not identified".into(),
        ));
    }
    let data = HeapsData::new(obs)?;
    if data.sum_types == 0.0 {
        return Err(Error::Underdetermined("no types observed".into()));
    }
    debug_assert_eq!(data.types.len(), obs.len());
    let (lo, hi) = HEAPS_BETA_BRACKET;
    let (beta, loglik) = maximize_unimodal(
        |b| data.loglik(data.profile_alpha(b), b),
        lo,
        hi,
        PARAM_TOLERANCE,
        "beta",
    )?;
    let order = obs[0].order;
    Ok(HeapsFit {
        alpha: data.profile_alpha(beta),
        beta,
        loglik,
        n_obs: obs.len(),
        order: obs.iter().all(|o| o.order == order).then_some(order),
        at_boundary: beta == lo || beta == hi,
    })
}

/// Serialized form of a fitted law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub law: String,
    pub parameters: BTreeMap<String, f64>,
    pub loglik: f64,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub max_rank: Option<usize>,
    pub n_obs: u64,
    pub at_boundary: bool,
}

impl From<&ZipfFit> for FitRecord {
    fn from(fit: &ZipfFit) -> Self {
        FitRecord {
            law: "zipf".into(),
            parameters: BTreeMap::from([("s".to_string(), fit.s)]),
            loglik: fit.loglik,
            max_rank: Some(fit.max_rank),
            n_obs: fit.n_tokens,
            at_boundary: fit.at_boundary,
        }
    }
}

impl From<&HeapsFit> for FitRecord {
    fn from(fit: &HeapsFit) -> Self {
        let law = match fit.order {
            Some(NgramOrder::Bigram) => "heaps-nhpp-bigram",
            _ => "heaps-nhpp",
        };
        FitRecord {
            law: law.into(),
            parameters: BTreeMap::from([("alpha".to_string(), fit.alpha), ("beta".to_string(), fit.beta)]),
            loglik: fit.loglik,
            max_rank: None,
            n_obs: fit.n_obs as u64,
            at_boundary: fit.at_boundary,
        }
    }
}
