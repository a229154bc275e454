//! Random Talagrand-DNF hard instances: the block partition of the central
//! Hamming-weight window, random width-w terms per block, the matched
//! yes/no function samplers that differ only on unique-satisfier points,
//! and the distinguishing-hardness experiment harness.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chains::{
    chain_lower_bound, exact_distance_to_k_monotone, greedy_disjoint_chains, is_k_monotone,
};
use crate::error::{Error, Result};
use crate::function::{DomainKind, FunctionTable, Point};
use crate::oracle::{prf, LabeledExample};

const STREAM_TERMS: u64 = 1 << 35;
const STREAM_PHI: u64 = (1 << 35) + 1;
const STREAM_NO_LABEL: u64 = (1 << 35) + 2;
const STREAM_SAMPLE: u64 = (1 << 35) + 3;
const STREAM_TRIAL: u64 = (1 << 35) + 4;

/// Parameters of the construction. Defaults follow the source formulas with
/// rounding; every field is overridable after `new`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TalagrandParams {
    pub d: usize,
    pub r: u32,
    pub k: u32,
    pub eps: f64,
    /// Term width w, default ceil((r-1) k sqrt(d) / (2 eps)).
    pub w: u32,
    /// Terms per block, default max(1, round(2^w e^{-i})).
    pub n_terms: Vec<u64>,
    /// Half-open Hamming-weight intervals [lo, hi) for the k(r-1) blocks,
    /// tiling [ceil(d/2), ceil(d/2) + floor(eps sqrt(d))).
    pub block_bounds: Vec<(u32, u32)>,
}

impl TalagrandParams {
    pub fn new(d: usize, r: u32, k: u32, eps: f64) -> Result<Self> {
        if d == 0 || d > 26 || r < 2 || k == 0 || !(0.0..=1.0).contains(&eps) || eps == 0.0 {
            return Err(Error::InvalidParameter(
                "need 1 <= d <= 26, r >= 2, k >= 1, eps in (0, 1]".into(),
            ));
        }
        let blocks = (k as usize) * (r as usize - 1);
        let window = (eps * (d as f64).sqrt()).floor() as usize;
        if window < blocks {
            return Err(Error::InvalidParameter(format!(
                "weight window of size {window} cannot hold {blocks} blocks; \
                 increase d or eps"
            )));
        }
        let w_f = ((r - 1) as f64 * k as f64 * (d as f64).sqrt() / (2.0 * eps)).ceil();
        if w_f >= 63.0 {
            // 2^w no longer fits in a term count; refuse rather than wrap.
            return Err(Error::InvalidParameter(format!(
                "term width {w_f} makes 2^w overflow"
            )));
        }
        let w = (w_f as u32).max(1);
        // Blocks with the same base value share one term pool (see
        // `sample_terms`), so their counts cycle with period r-1.
        let n_terms = (0..blocks)
            .map(|i| {
                let ln_n = w as f64 * std::f64::consts::LN_2 - (i % (r as usize - 1)) as f64;
                (ln_n.exp().round() as u64).max(1)
            })
            .collect();
        let lo = (d as u32).div_ceil(2);
        let base = (window / blocks) as u32;
        let block_bounds = (0..blocks as u32)
            .map(|i| {
                let hi = if i as usize == blocks - 1 {
                    lo + window as u32 // last block absorbs the remainder
                } else {
                    lo + (i + 1) * base
                };
                (lo + i * base, hi)
            })
            .collect();
        Ok(TalagrandParams {
            d,
            r,
            k,
            eps,
            w,
            n_terms,
            block_bounds,
        })
    }

    pub fn blocks(&self) -> usize {
        self.block_bounds.len()
    }

    /// First weight strictly above the window (values there are r-1).
    pub fn window_end(&self) -> u32 {
        self.block_bounds.last().expect("nonempty blocks").1
    }

    /// Base output value of block i: i mod (r-1).
    pub fn base_value(&self, i: usize) -> u8 {
        (i as u32 % (self.r - 1)) as u8
    }
}

/// One random width-w conjunction: the indicator mask of w uniform
/// coordinate draws (a multiset, so popcount <= w).
pub fn sample_term(d: usize, w: u32, rng: &mut impl Rng) -> u32 {
    let mut mask = 0u32;
    for _ in 0..w {
        mask |= 1 << rng.gen_range(0..d);
    }
    mask
}

/// The terms of one instance: per block i, N_i stored masks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermSet {
    pub terms: Vec<Vec<u32>>,
}

/// Draw a full term set for `params` from a seeded stream.
///
/// All blocks with the same base value b share a single pool of terms (one
/// pool per residue class i mod (r-1)). Sharing is what keeps yes-instances
/// k-monotone: along any upward move the set of satisfied pool terms can
/// only grow, so the assigned value cannot fall back from b+1 to b. With
/// independent per-block pools a chain could satisfy a term in one block,
/// rise into the next block of the same base, satisfy nothing there, and
/// record a value decrease followed by an increase toward the top boundary
/// -- defeating k-monotonicity whenever there are two or more block groups.
pub fn sample_terms(params: &TalagrandParams, seed: u64) -> TermSet {
    let mut rng = ChaCha8Rng::seed_from_u64(prf(seed, STREAM_TERMS, 0));
    let res = params.r as usize - 1;
    let pools: Vec<Vec<u32>> = (0..res.min(params.blocks()))
        .map(|a| {
            (0..params.n_terms[a])
                .map(|_| sample_term(params.d, params.w, &mut rng))
                .collect()
        })
        .collect();
    let terms = (0..params.blocks()).map(|i| pools[i % res].clone()).collect();
    TermSet { terms }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Variant {
    /// Fixed assignment phi_i(j) in {base, base+1} per term.
    Yes { phi: Vec<Vec<u8>> },
    /// Lazy per-point uniform bit keyed by (seed, block, point).
    No { noise_seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TalagrandInstance {
    pub params: TalagrandParams,
    pub terms: TermSet,
    pub variant: Variant,
}

impl TalagrandInstance {
    /// A yes-instance: terms and the assignments phi both drawn from `seed`.
    pub fn sample_yes(params: &TalagrandParams, seed: u64) -> Self {
        let terms = sample_terms(params, seed);
        Self::yes_with_terms(params, terms, seed)
    }

    /// A yes-instance over externally supplied terms (for matched pairs).
    /// The assignment is drawn once per shared term pool, mirroring
    /// `sample_terms`: blocks with the same base value reuse one phi.
    pub fn yes_with_terms(params: &TalagrandParams, terms: TermSet, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(prf(seed, STREAM_PHI, 0));
        let res = params.r as usize - 1;
        let pool_phi: Vec<Vec<u8>> = (0..res.min(params.blocks()))
            .map(|a| {
                let base = params.base_value(a);
                (0..terms.terms[a].len())
                    .map(|_| base + rng.gen_range(0..2u8))
                    .collect()
            })
            .collect();
        let phi = (0..params.blocks()).map(|i| pool_phi[i % res].clone()).collect();
        TalagrandInstance {
            params: params.clone(),
            terms,
            variant: Variant::Yes { phi },
        }
    }

    pub fn sample_no(params: &TalagrandParams, seed: u64) -> Self {
        let terms = sample_terms(params, seed);
        Self::no_with_terms(params, terms, seed)
    }

    pub fn no_with_terms(params: &TalagrandParams, terms: TermSet, seed: u64) -> Self {
        TalagrandInstance {
            params: params.clone(),
            terms,
            variant: Variant::No { noise_seed: seed },
        }
    }

    pub fn is_yes(&self) -> bool {
        matches!(self.variant, Variant::Yes { .. })
    }

    /// Block of x by Hamming weight, or none outside the window.
    pub fn block_index(&self, x: u32) -> Option<usize> {
        block_index(x, &self.params)
    }

    /// Index of the unique term of block i satisfied by x, if exactly one is.
    pub fn unique_satisfier(&self, x: u32) -> Option<(usize, usize)> {
        let i = self.block_index(x)?;
        let mut found = None;
        for (j, &t) in self.terms.terms[i].iter().enumerate() {
            if t & x == t {
                if found.is_some() {
                    return None; // two satisfied terms
                }
                found = Some((i, j));
            }
        }
        found
    }

    /// Pointwise evaluation. Below the window -> 0, above -> r-1; inside
    /// block i: no satisfied term -> i mod (r-1), two or more -> +1, unique
    /// term j -> phi_i(j) (yes) or a keyed random bit (no).
    pub fn eval(&self, x: u32) -> u8 {
        let p = &self.params;
        let weight = x.count_ones();
        if 2 * weight < p.d as u32 {
            return 0;
        }
        if weight >= p.window_end() {
            return (p.r - 1) as u8;
        }
        let i = self.block_index(x).expect("window weights are tiled by blocks");
        let base = p.base_value(i);
        let mut unique = None;
        for (j, &t) in self.terms.terms[i].iter().enumerate() {
            if t & x == t {
                if unique.is_some() {
                    return base + 1; // two different satisfied terms
                }
                unique = Some(j);
            }
        }
        match unique {
            None => base,
            Some(j) => match &self.variant {
                Variant::Yes { phi } => phi[i][j],
                Variant::No { noise_seed } => {
                    base + (prf(*noise_seed, STREAM_NO_LABEL + i as u64, x as u64) & 1) as u8
                }
            },
        }
    }

    /// Full truth table (d <= 20).
    pub fn materialize(&self) -> Result<FunctionTable> {
        if self.params.d > crate::chains::MAX_CHAIN_DP_DIM {
            return Err(Error::Budget(format!(
                "materializing d = {} exceeds the table budget",
                self.params.d
            )));
        }
        FunctionTable::from_fn(DomainKind::Hypercube { d: self.params.d }, self.params.r, |i| {
            self.eval(i as u32)
        })
    }

    /// Draw s uniform labeled examples from this instance.
    pub fn draw(&self, seed: u64, s: u64) -> Vec<LabeledExample> {
        let mask = (1u64 << self.params.d) - 1;
        (0..s)
            .map(|idx| {
                let x = (prf(seed, STREAM_SAMPLE, idx) & mask) as u32;
                LabeledExample {
                    point: Point::Cube(x),
                    label: self.eval(x),
                }
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// The block holding Hamming weight |x|, or none outside the window.
pub fn block_index(x: u32, params: &TalagrandParams) -> Option<usize> {
    let weight = x.count_ones();
    params
        .block_bounds
        .iter()
        .position(|&(lo, hi)| lo <= weight && weight < hi)
}

/// Exact structural check: every yes-instance must be k-monotone.
pub fn verify_yes_k_monotone(instance: &TalagrandInstance) -> Result<bool> {
    if !instance.is_yes() {
        return Err(Error::InvalidParameter(
            "verification applies to yes-instances".into(),
        ));
    }
    is_k_monotone(&instance.materialize()?, instance.params.k)
}

/// Monte-Carlo estimates of the unique-satisfier probabilities for block i,
/// reported against the asymptotic [1/(20 N_i), 3/N_i] band as a diagnostic
/// only: desk-scale parameters routinely sit outside it.
#[derive(Debug, Clone, Serialize)]
pub struct UniqueProbEstimate {
    pub block: usize,
    pub n_terms: u64,
    pub trials: u64,
    /// P[x in U_{i,0} | x in B_i] over fresh terms per trial.
    pub p_single: f64,
    pub se_single: f64,
    /// P[x in U_i | x in B_i] (some term uniquely satisfied).
    pub p_any: f64,
    pub se_any: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    pub in_band: bool,
}

pub fn estimate_unique_prob(
    params: &TalagrandParams,
    i: usize,
    trials: u64,
    seed: u64,
) -> Result<UniqueProbEstimate> {
    if trials == 0 || i >= params.blocks() {
        return Err(Error::InvalidParameter(
            "need trials >= 1 and a valid block index".into(),
        ));
    }
    let (lo, hi) = params.block_bounds[i];
    let n = params.n_terms[i];
    let (hits_single, hits_any) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(prf(seed, STREAM_TRIAL, t));
            let terms: Vec<u32> = (0..n).map(|_| sample_term(params.d, params.w, &mut rng)).collect();
            // Rejection-sample x uniform on the block (central weights carry
            // most of the cube's mass, so this terminates quickly).
            let x = loop {
                let cand = rng.gen_range(0..(1u64 << params.d)) as u32;
                let wt = cand.count_ones();
                if lo <= wt && wt < hi {
                    break cand;
                }
            };
            let sat = terms.iter().filter(|&&t| t & x == t).count();
            let unique_idx = if sat == 1 {
                terms.iter().position(|&t| t & x == t)
            } else {
                None
            };
            (u64::from(unique_idx == Some(0)), u64::from(sat == 1))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let t = trials as f64;
    let p_single = hits_single as f64 / t;
    let p_any = hits_any as f64 / t;
    let se = |p: f64| (p * (1.0 - p) / t).sqrt();
    let band_lo = 1.0 / (20.0 * n as f64);
    let band_hi = 3.0 / n as f64;
    Ok(UniqueProbEstimate {
        block: i,
        n_terms: n,
        trials,
        p_single,
        se_single: se(p_single),
        p_any,
        se_any: se(p_any),
        band_lo,
        band_hi,
        in_band: band_lo <= p_single && p_single <= band_hi,
    })
}

/// A tester in the distinguishing game: sees one instance's labeled sample
/// (and may inspect the instance's public terms) and outputs accept.
pub type InstanceTester = dyn Fn(&TalagrandInstance, &[LabeledExample]) -> bool + Sync;

/// One row of the hardness experiment: accept rates on yes and no streams.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRow {
    pub s: u64,
    pub trials: u64,
    pub yes_accept: f64,
    pub no_accept: f64,
    pub advantage: f64,
    pub stderr: f64,
}

/// Run `trials` independent {fresh instance, fresh s-sample, verdict} rounds
/// on each of the yes and no streams. Advantage = yes rate - no rate.
pub fn distinguishing_experiment(
    params: &TalagrandParams,
    tester: &InstanceTester,
    s: u64,
    trials: u64,
    seed: u64,
) -> Result<ExperimentRow> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let run = |yes: bool| -> u64 {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let inst_seed = prf(seed, STREAM_TRIAL, 2 * t + u64::from(yes));
                let inst = if yes {
                    TalagrandInstance::sample_yes(params, inst_seed)
                } else {
                    TalagrandInstance::sample_no(params, inst_seed)
                };
                let sample = inst.draw(prf(inst_seed, STREAM_SAMPLE, 1), s);
                u64::from(tester(&inst, &sample))
            })
            .sum()
    };
    let yes_accept = run(true) as f64 / trials as f64;
    let no_accept = run(false) as f64 / trials as f64;
    let t = trials as f64;
    let var = yes_accept * (1.0 - yes_accept) / t + no_accept * (1.0 - no_accept) / t;
    Ok(ExperimentRow {
        s,
        trials,
        yes_accept,
        no_accept,
        advantage: yes_accept - no_accept,
        stderr: var.sqrt(),
    })
}

/// Reference distinguisher: reject iff two sampled points share the same
/// unique satisfier (block i, term j) but carry different labels. Yes
/// instances label each U_{i,j} by the constant phi_i(j), so this never
/// rejects a yes-instance.
pub fn birthday_distinguisher(inst: &TalagrandInstance, sample: &[LabeledExample]) -> bool {
    let mut seen: std::collections::HashMap<(usize, usize), u8> = std::collections::HashMap::new();
    for e in sample {
        let x = match e.point {
            Point::Cube(m) => m,
            _ => return true,
        };
        if let Some(key) = inst.unique_satisfier(x) {
            match seen.insert(key, e.label) {
                Some(prev) if prev != e.label => return false,
                _ => {}
            }
        }
    }
    true
}

pub fn write_experiment_csv<W: Write>(mut w: W, rows: &[ExperimentRow]) -> Result<()> {
    writeln!(w, "s,trials,yes_accept,no_accept,advantage,stderr")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.s, r.trials, r.yes_accept, r.no_accept, r.advantage, r.stderr
        )?;
    }
    Ok(())
}

/// How far an instance is from k-monotone: exact where enumeration is
/// feasible, otherwise the disjoint-chain lower bound with greedily peeled
/// (3k+1)-alternating chains.
#[derive(Debug, Clone, Serialize)]
pub struct FarnessReport {
    pub method: FarnessMethod,
    /// Exact distance, or a certified lower bound on it.
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FarnessMethod {
    Exact,
    ChainBound,
}

pub fn farness_report(instance: &TalagrandInstance) -> Result<FarnessReport> {
    let f = instance.materialize()?;
    let k = instance.params.k;
    if let Ok(dist) = exact_distance_to_k_monotone(&f, k, None) {
        return Ok(FarnessReport {
            method: FarnessMethod::Exact,
            value: *dist.numer() as f64 / *dist.denom() as f64,
        });
    }
    let family = greedy_disjoint_chains(&f, 3 * k as usize + 1)?;
    let bound = if family.is_empty() {
        0.0
    } else {
        let b = chain_lower_bound(&f, &family, k)?;
        *b.numer() as f64 / *b.denom() as f64
    };
    Ok(FarnessReport {
        method: FarnessMethod::ChainBound,
        value: bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d: usize, r: u32, k: u32, eps: f64) -> TalagrandParams {
        TalagrandParams::new(d, r, k, eps).unwrap()
    }

    #[test]
    fn blocks_tile_the_window() {
        for (d, r, k, eps) in [(12, 2, 1, 0.9), (20, 3, 2, 0.9), (16, 2, 2, 0.8)] {
            let p = params(d, r, k, eps);
            assert_eq!(p.blocks(), (k as usize) * (r as usize - 1));
            let lo = (d as u32).div_ceil(2);
            let window = (eps * (d as f64).sqrt()).floor() as u32;
            assert_eq!(p.block_bounds[0].0, lo);
            assert_eq!(p.window_end(), lo + window);
            for pair in p.block_bounds.windows(2) {
                assert_eq!(pair[0].1, pair[1].0, "blocks must be consecutive");
            }
            // Every window weight lands in exactly one block.
            for wt in lo..p.window_end() {
                let n = p
                    .block_bounds
                    .iter()
                    .filter(|&&(a, b)| a <= wt && wt < b)
                    .count();
                assert_eq!(n, 1);
            }
        }
    }

    #[test]
    fn parameter_validation() {
        // Window too small to hold the blocks.
        assert!(TalagrandParams::new(4, 3, 2, 0.1).is_err());
        // Term width overflow (large d, tiny eps).
        assert!(TalagrandParams::new(26, 6, 26, 1e-3).is_err());
        assert!(TalagrandParams::new(0, 2, 1, 0.5).is_err());
    }

    #[test]
    fn term_counts_decay() {
        let p = params(20, 3, 2, 0.9);
        assert!(p.n_terms.iter().all(|&n| n >= 1));
        // Counts decay across the residues of one group, then repeat: blocks
        // sharing a base value share a pool.
        for pair in p.n_terms[..(p.r as usize - 1)].windows(2) {
            assert!(pair[0] >= pair[1], "N decays within a group");
        }
        for (i, &n) in p.n_terms.iter().enumerate() {
            assert_eq!(n, p.n_terms[i % (p.r as usize - 1)]);
        }
    }

    #[test]
    fn term_width_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let t = sample_term(8, 4, &mut rng);
            assert!(t.count_ones() <= 4);
            assert!(t < 1 << 8);
        }
        // w = 1 draws a single bit.
        assert_eq!(sample_term(8, 1, &mut rng).count_ones(), 1);
    }

    #[test]
    fn eval_boundary_rules() {
        let p = params(12, 3, 1, 0.9);
        let inst = TalagrandInstance::sample_yes(&p, 5);
        for x in 0u32..(1 << 12) {
            let v = inst.eval(x);
            let wt = x.count_ones();
            if wt < 6 {
                assert_eq!(v, 0);
            } else if wt >= p.window_end() {
                assert_eq!(v, 2);
            } else {
                assert!(v < 3);
            }
        }
    }

    #[test]
    fn materialize_matches_pointwise() {
        let p = params(10, 2, 1, 0.9);
        let inst = TalagrandInstance::sample_no(&p, 3);
        let f = inst.materialize().unwrap();
        for x in 0u32..(1 << 10) {
            assert_eq!(f.value(&Point::Cube(x)).unwrap(), inst.eval(x));
        }
    }

    #[test]
    fn yes_instances_are_k_monotone() {
        for (r, k) in [(2u32, 1u32), (2, 2), (3, 1)] {
            let p = params(12, r, k, 0.9);
            for seed in 0..10 {
                let inst = TalagrandInstance::sample_yes(&p, seed);
                assert!(
                    verify_yes_k_monotone(&inst).unwrap(),
                    "r={r} k={k} seed={seed}"
                );
            }
        }
    }

    #[test]
    fn matched_variants_agree_off_unique_points() {
        let p = params(10, 2, 1, 0.9);
        let terms = sample_terms(&p, 77);
        let yes = TalagrandInstance::yes_with_terms(&p, terms.clone(), 77);
        let no = TalagrandInstance::no_with_terms(&p, terms, 78);
        for x in 0u32..(1 << 10) {
            if yes.unique_satisfier(x).is_none() {
                assert_eq!(yes.eval(x), no.eval(x), "x = {x:#b}");
            }
        }
    }

    #[test]
    fn no_labels_consistent_across_calls() {
        let p = params(10, 2, 1, 0.9);
        let inst = TalagrandInstance::sample_no(&p, 9);
        for x in 0u32..(1 << 10) {
            assert_eq!(inst.eval(x), inst.eval(x));
        }
    }

    #[test]
    fn unique_prob_estimates() {
        let p = params(12, 2, 1, 0.9);
        let e = estimate_unique_prob(&p, 0, 4000, 11).unwrap();
        assert!(e.p_any >= e.p_single);
        assert!(e.se_any <= 0.01);
        // Repeatability across seeds within 3 sigma.
        let e2 = estimate_unique_prob(&p, 0, 4000, 12).unwrap();
        let sigma = (e.se_any.powi(2) + e2.se_any.powi(2)).sqrt();
        assert!((e.p_any - e2.p_any).abs() <= 3.0 * sigma + 1e-12);
    }

    #[test]
    fn always_accept_has_zero_advantage() {
        let p = params(10, 2, 1, 0.9);
        let row =
            distinguishing_experiment(&p, &|_, _| true, 8, 50, 2).unwrap();
        assert_eq!(row.advantage, 0.0);
        assert_eq!(row.yes_accept, 1.0);
    }

    #[test]
    fn birthday_never_rejects_yes() {
        let p = params(12, 2, 1, 0.9);
        let row = distinguishing_experiment(&p, &birthday_distinguisher, 64, 60, 4).unwrap();
        assert_eq!(row.yes_accept, 1.0);
    }

    #[test]
    fn farness_exact_on_yes_is_zero() {
        let p = params(12, 2, 1, 0.9);
        let inst = TalagrandInstance::sample_yes(&p, 1);
        // d = 12 exceeds the enumeration budget, so this uses the chain
        // bound, which must be 0 for a k-monotone table.
        let rep = farness_report(&inst).unwrap();
        assert_eq!(rep.value, 0.0);
    }

    #[test]
    fn instance_json_round_trip() {
        let p = params(10, 3, 1, 0.9);
        let inst = TalagrandInstance::sample_yes(&p, 6);
        let back = TalagrandInstance::from_json(&inst.to_json().unwrap()).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.eval(0b1111110000), inst.eval(0b1111110000));
    }

    #[test]
    fn experiment_csv_shape() {
        let row = ExperimentRow {
            s: 4,
            trials: 10,
            yes_accept: 1.0,
            no_accept: 0.9,
            advantage: 0.1,
            stderr: 0.09,
        };
        let mut buf = Vec::new();
        write_experiment_csv(&mut buf, &[row]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("s,trials,yes_accept,no_accept,advantage,stderr\n"));
        assert!(s.contains("4,10,1,0.9,0.1,0.09"));
    }
}
