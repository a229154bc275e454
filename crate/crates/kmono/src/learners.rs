//! Learning algorithms: the low-degree algorithm with noise-corrected
//! coefficient estimates, the coupon-collecting majority learner for
//! hypergrids, the k-monotone hypercube learner, and threshold composition
//! for [r]-valued targets.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::parity;
use crate::function::{DomainKind, FunctionTable, Point};
use crate::oracle::{prf, Distribution, LabeledExample, OracleConfig, Source};

const STREAM_COMPOSE: u64 = 1 << 33;

/// All subset masks of [d] with popcount <= tau, grouped by weight via
/// Gosper's hack (no 2^d scan when tau << d).
pub fn masks_up_to_weight(d: usize, tau: u32) -> Vec<u32> {
    let mut out = vec![0u32];
    for w in 1..=tau.min(d as u32) {
        let mut m: u32 = (1 << w) - 1;
        while (m as u64) < (1u64 << d) {
            out.push(m);
            // Gosper: next mask with the same popcount.
            let c = m & m.wrapping_neg();
            let r = m + c;
            m = (((r ^ m) >> 2) / c) | r;
        }
    }
    out
}

/// Number of subsets of [d] with size <= tau.
pub fn count_masks_up_to_weight(d: usize, tau: u32) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for i in 0..=tau.min(d as u32) as u128 {
        if i > 0 {
            binom = binom * (d as u128 - i + 1) / i;
        }
        total += binom;
    }
    total
}

/// Sign hypothesis over the low-degree Fourier estimates:
/// h(x) = sgn(sum_{|S|<=tau} Z_S chi_S(x)), ties resolved to +1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowDegreeHypothesis {
    pub d: usize,
    pub tau: u32,
    /// (mask, Z_S) pairs for every |S| <= tau.
    pub coeffs: Vec<(u32, f64)>,
}

impl LowDegreeHypothesis {
    pub fn score(&self, x: u32) -> f64 {
        self.coeffs
            .iter()
            .map(|&(s, z)| z * parity(s, x))
            .sum()
    }

    /// ±1 prediction; a zero score resolves to +1.
    pub fn predict_pm1(&self, x: u32) -> f64 {
        if self.score(x) < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn predict(&self, x: u32) -> u8 {
        u8::from(self.predict_pm1(x) > 0.0)
    }
}

/// Fit the noise-corrected low-degree estimates from a fixed sample:
/// Z_S = mean(y * chi_S(x)) / (1 - 2 eta). Unbiased for f̂(S) because
/// E[y chi_S] = (1 - 2 eta) f̂(S) under label-flip noise.
pub fn low_degree_fit(
    d: usize,
    tau: u32,
    eta: f64,
    samples: &[(u32, f64)],
) -> Result<LowDegreeHypothesis> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter(
            "low-degree fit requires at least one example".into(),
        ));
    }
    if !(0.0..0.5).contains(&eta) {
        return Err(Error::InvalidParameter(format!(
            "eta = {eta} must lie in [0, 1/2)"
        )));
    }
    let correction = 1.0 / (1.0 - 2.0 * eta);
    let inv_s = 1.0 / samples.len() as f64;
    let coeffs = masks_up_to_weight(d, tau)
        .into_iter()
        .map(|s| {
            let mean: f64 = samples.iter().map(|&(x, y)| y * parity(s, x)).sum::<f64>() * inv_s;
            (s, mean * correction)
        })
        .collect();
    Ok(LowDegreeHypothesis { d, tau, coeffs })
}

fn cube_dim(cfg: &OracleConfig) -> Result<usize> {
    match cfg.distribution {
        Distribution::UniformHypercube { d } => Ok(d),
        _ => Err(Error::DomainMismatch(
            "this learner requires the uniform hypercube oracle".into(),
        )),
    }
}

fn cube_samples(examples: &[LabeledExample]) -> Result<Vec<(u32, f64)>> {
    examples
        .iter()
        .map(|e| match e.point {
            Point::Cube(m) => Ok((m, e.label_pm1())),
            _ => Err(Error::DomainMismatch("expected hypercube examples".into())),
        })
        .collect()
}

/// The low-degree algorithm under classification noise: draw s examples and
/// estimate every coefficient of degree <= tau. tau above d is clamped.
pub fn low_degree_learn(cfg: &OracleConfig, tau: u32, s: u64) -> Result<LowDegreeHypothesis> {
    if s == 0 {
        return Err(Error::InvalidParameter(
            "sample count must be >= 1".into(),
        ));
    }
    if cfg.r != 2 {
        return Err(Error::InvalidParameter(
            "low-degree learner requires a Boolean target".into(),
        ));
    }
    let d = cube_dim(cfg)?;
    let tau = if tau > d as u32 {
        eprintln!("warning: degree cutoff tau={tau} clamped to d={d}");
        d as u32
    } else {
        tau
    };
    let samples = cube_samples(&cfg.draw(s)?)?;
    low_degree_fit(d, tau, cfg.eta, &samples)
}

/// Heuristic instantiation of the sample-size bound
/// c * (1/(eps^2 (1-2 eta)^2) + ln(1/delta)) * sum_{i<=tau} C(d,i).
pub fn low_degree_sample_size(
    eps: f64,
    delta: f64,
    eta: f64,
    d: usize,
    tau: u32,
    c: f64,
) -> Result<u64> {
    if !(0.0..0.5).contains(&eta) || eps <= 0.0 || !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::InvalidParameter(
            "need eps > 0, delta in (0,1), eta in [0,1/2)".into(),
        ));
    }
    let coeffs = count_masks_up_to_weight(d, tau) as f64;
    let val = c * (1.0 / (eps * eps * (1.0 - 2.0 * eta).powi(2)) + (1.0 / delta).ln()) * coeffs;
    if !val.is_finite() || val > 9.0e18 {
        return Err(Error::Budget(format!(
            "low-degree sample size diverges ({val:e})"
        )));
    }
    Ok(val.ceil() as u64)
}

/// Learner for k-monotone Boolean targets on the hypercube: the low-degree
/// algorithm at cutoff tau = ceil(k sqrt(d) / eps), clamped to d. The cutoff
/// is where the spectral tail of any k-monotone function drops below eps.
pub fn kmono_learn_hypercube(
    cfg: &OracleConfig,
    k: u32,
    eps: f64,
    s: u64,
) -> Result<LowDegreeHypothesis> {
    if eps <= 0.0 {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let d = cube_dim(cfg)?;
    let tau = kmono_degree_cutoff(d, k, eps);
    low_degree_learn(cfg, tau, s)
}

/// ceil(k sqrt(d) / eps) clamped to d.
pub fn kmono_degree_cutoff(d: usize, k: u32, eps: f64) -> u32 {
    ((k as f64 * (d as f64).sqrt() / eps).ceil() as u64).min(d as u64) as u32
}

/// Per-point majority-vote table: h(x) = sgn(m+_x - m-_x); ties and points
/// never sampled default to +1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MajorityTable {
    #[serde(flatten)]
    pub domain: DomainKind,
    pub plus: Vec<u64>,
    pub minus: Vec<u64>,
}

impl MajorityTable {
    pub fn seen(&self, idx: usize) -> u64 {
        self.plus[idx] + self.minus[idx]
    }

    pub fn predict_idx(&self, idx: usize) -> u8 {
        u8::from(self.plus[idx] >= self.minus[idx])
    }

    pub fn min_multiplicity(&self) -> u64 {
        (0..self.plus.len()).map(|i| self.seen(i)).min().unwrap_or(0)
    }

    pub fn to_table(&self) -> Result<FunctionTable> {
        FunctionTable::from_fn(self.domain, 2, |i| self.predict_idx(i))
    }
}

/// Accumulate majority counts from a fixed sample of (index, ±1 label) pairs.
pub fn majority_fit(domain: DomainKind, samples: &[(usize, f64)]) -> MajorityTable {
    let size = domain.size();
    let mut plus = vec![0u64; size];
    let mut minus = vec![0u64; size];
    for &(idx, y) in samples {
        if y > 0.0 {
            plus[idx] += 1;
        } else {
            minus[idx] += 1;
        }
    }
    MajorityTable {
        domain,
        plus,
        minus,
    }
}

/// The coupon-collecting learner: ingest s examples and majority-vote per
/// point.
pub fn coupon_learn(cfg: &OracleConfig, s: u64) -> Result<MajorityTable> {
    if cfg.r != 2 {
        return Err(Error::InvalidParameter(
            "coupon learner requires a Boolean target".into(),
        ));
    }
    let domain = match cfg.distribution {
        Distribution::UniformHypergrid { d, n } => DomainKind::Hypergrid { d, n },
        Distribution::UniformHypercube { d } => DomainKind::Hypercube { d },
        _ => {
            return Err(Error::DomainMismatch(
                "coupon learner requires a uniform finite-domain oracle".into(),
            ))
        }
    };
    let probe = FunctionTable::new(domain, 2, vec![0; domain.size()])?;
    let samples: Vec<(usize, f64)> = cfg
        .draw(s)?
        .iter()
        .map(|e| Ok((probe.index_of(&e.point)?, e.label_pm1())))
        .collect::<Result<_>>()?;
    Ok(majority_fit(domain, &samples))
}

/// The literal coupon-collector sample size m * ln(2m/delta) * N^(2d) with
/// m = 2/(1-2 eta)^2 * ln(4/(eps delta)). Computed in logs; errors out when
/// the count exceeds `budget` (default 2^53) instead of capping.
pub fn coupon_sample_size(
    eps: f64,
    delta: f64,
    eta: f64,
    n: usize,
    d: usize,
    budget: Option<f64>,
) -> Result<u64> {
    let (m, ln_s) = coupon_sample_size_ln(eps, delta, eta, n, d)?;
    let budget = budget.unwrap_or((1u64 << 53) as f64);
    if ln_s > budget.ln() {
        return Err(Error::Budget(format!(
            "coupon sample size exp({ln_s:.2}) (m = {m:.1}) exceeds budget {budget:e}"
        )));
    }
    Ok(ln_s.exp().ceil() as u64)
}

/// (m, ln of the sample count); used for cost comparisons without overflow.
pub fn coupon_sample_size_ln(
    eps: f64,
    delta: f64,
    eta: f64,
    n: usize,
    d: usize,
) -> Result<(f64, f64)> {
    if !(0.0..0.5).contains(&eta) || eps <= 0.0 || !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::InvalidParameter(
            "need eps > 0, delta in (0,1), eta in [0,1/2)".into(),
        ));
    }
    let m = 2.0 / (1.0 - 2.0 * eta).powi(2) * (4.0 / (eps * delta)).ln();
    let ln_s = m.ln() + (2.0 * m / delta).ln().ln() + 2.0 * d as f64 * (n as f64).ln();
    Ok((m, ln_s))
}

/// A hypothesis in any of the shapes the learners produce; serializes to
/// JSON as (kind, payload) so the CLI and testers can round-trip it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hypothesis {
    LowDegree(LowDegreeHypothesis),
    Majority(MajorityTable),
    Table(FunctionTable),
    /// Threshold composition: parts[t-1] predicts 1(f(x) >= t);
    /// h(x) = max{t : part_t(x) = 1}, default 0.
    Composed { parts: Vec<Hypothesis> },
}

impl Hypothesis {
    pub fn predict(&self, p: &Point) -> Result<u8> {
        match self {
            Hypothesis::LowDegree(h) => match p {
                Point::Cube(m) => Ok(h.predict(*m)),
                _ => Err(Error::DomainMismatch(
                    "low-degree hypothesis expects cube points".into(),
                )),
            },
            Hypothesis::Majority(h) => {
                let probe = FunctionTable::new(h.domain, 2, vec![0; h.domain.size()])?;
                Ok(h.predict_idx(probe.index_of(p)?))
            }
            Hypothesis::Table(t) => t.value(p),
            Hypothesis::Composed { parts } => {
                let mut value = 0u8;
                for (i, part) in parts.iter().enumerate() {
                    if part.predict(p)? == 1 {
                        value = i as u8 + 1;
                    }
                }
                Ok(value)
            }
        }
    }

    /// Evaluate the hypothesis on every point of `dom`.
    pub fn materialize(&self, dom: DomainKind, r: u32) -> Result<FunctionTable> {
        let probe = FunctionTable::new(dom, r.max(2), vec![0; dom.size()])?;
        let mut vals = Vec::with_capacity(dom.size());
        for i in 0..dom.size() {
            vals.push(self.predict(&probe.point_at(i))?);
        }
        FunctionTable::new(dom, r, vals)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// A pluggable Boolean-target learner used by threshold composition and the
/// testers: maps (oracle, eps, delta) to a hypothesis.
pub type BooleanLearner<'a> = dyn Fn(&OracleConfig, f64, f64) -> Result<(Hypothesis, u64)> + 'a;

/// Learn an [r]-valued target by learning each Boolean threshold
/// f_t(x) = 1(f(x) >= t) to error eps/r and composing
/// h(x) = max{t : h_t(x) = 1}. Requires noiseless labels: label-flip noise
/// is undefined for multi-valued targets.
pub fn threshold_compose_learn(
    cfg: &OracleConfig,
    base: &BooleanLearner,
    eps: f64,
    delta: f64,
) -> Result<(Hypothesis, u64)> {
    if cfg.eta > 0.0 {
        return Err(Error::UnsupportedNoise(
            "threshold composition requires a noiseless oracle".into(),
        ));
    }
    let r = cfg.r;
    let eps_t = eps / r as f64;
    let delta_t = delta / r as f64;
    let mut parts = Vec::new();
    let mut used = 0u64;
    for t in 1..r {
        let source = thresholded_source(&cfg.source, t);
        let child = OracleConfig {
            source,
            distribution: cfg.distribution.clone(),
            r: 2,
            eta: 0.0,
            seed: prf(cfg.seed, STREAM_COMPOSE, t as u64),
        };
        let (h, s) = base(&child, eps_t, delta_t)?;
        used += s;
        parts.push(h);
    }
    if parts.len() == 1 {
        // r = 2 reduces to a single base-learner call.
        return Ok((parts.pop().unwrap(), used));
    }
    Ok((Hypothesis::Composed { parts }, used))
}

fn thresholded_source(source: &Source, t: u32) -> Source {
    match source {
        Source::Table(f) => {
            let thr = f.threshold(t).expect("threshold of a valid table");
            Source::Table(Arc::new(thr))
        }
        Source::Callable(f) => {
            let f = f.clone();
            Source::Callable(Arc::new(move |p: &Point| u8::from(f(p) as u32 >= t)))
        }
    }
}
