//! Alternating-chain machinery: the longest-alternating-chain DP, the
//! k-monotonicity check, exact distance to k-monotonicity by enumeration,
//! and the disjoint-chain distance lower bound.
//!
//! An m-alternating chain is a strictly increasing sequence of m points
//! whose values strictly decrease on odd steps and strictly increase on even
//! steps (so the first change is always a decrease).

use num_rational::Rational64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::{index_dominates, is_comparable, DomainKind, FunctionTable, Point};

/// Hard cap for the full hypercube chain DP (3^d comparable-pair visits).
pub const MAX_CHAIN_DP_DIM: usize = 20;

/// Cap on domain size for the generic pairwise chain DP (hypergrids).
pub const MAX_PAIRWISE_DP_POINTS: usize = 1 << 13;

/// Default cap on the number of candidate tables `exact_distance_to_k_monotone`
/// will enumerate.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1 << 24;

/// A witness of non-k-monotonicity: strictly increasing points whose values
/// alternate starting with a decrease.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlternatingChain {
    pub points: Vec<Point>,
    pub values: Vec<u8>,
}

impl AlternatingChain {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Check the chain is a valid alternating chain for `f`.
    pub fn validate_for(&self, f: &FunctionTable) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::InvalidChainFamily("empty chain".into()));
        }
        if self.points.len() != self.values.len() {
            return Err(Error::InvalidChainFamily(
                "points/values length mismatch".into(),
            ));
        }
        for (p, &v) in self.points.iter().zip(&self.values) {
            if f.value(p)? != v {
                return Err(Error::InvalidChainFamily(format!(
                    "recorded value {v} disagrees with the table at {p}"
                )));
            }
        }
        for i in 0..self.points.len() - 1 {
            let (x, y) = (&self.points[i], &self.points[i + 1]);
            // Comparable with strictly smaller weight means x strictly below y.
            if !is_comparable(x, y)? || x.weight() >= y.weight() {
                return Err(Error::InvalidChainFamily(format!(
                    "points {x} and {y} are not strictly increasing"
                )));
            }
            let diff = self.values[i + 1] as i32 - self.values[i] as i32;
            // Step i+1 (1-based) must decrease when odd, increase when even.
            let want_decrease = (i + 1) % 2 == 1;
            if want_decrease && diff >= 0 || !want_decrease && diff <= 0 {
                return Err(Error::InvalidChainFamily(format!(
                    "step {} does not alternate (diff {diff})",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Structural check without a backing table: strictly increasing points
    /// with values alternating starting on a decrease.
    pub fn alternation_ok(&self) -> bool {
        if self.points.is_empty() || self.points.len() != self.values.len() {
            return false;
        }
        for i in 0..self.points.len() - 1 {
            let (x, y) = (&self.points[i], &self.points[i + 1]);
            match is_comparable(x, y) {
                Ok(true) if x.weight() < y.weight() => {}
                _ => return false,
            }
            let diff = self.values[i + 1] as i32 - self.values[i] as i32;
            let want_decrease = (i + 1) % 2 == 1;
            if want_decrease && diff >= 0 || !want_decrease && diff <= 0 {
                return false;
            }
        }
        true
    }
}

/// A family of pairwise vertex-disjoint alternating chains of equal length.
#[derive(Debug, Clone, Default)]
pub struct DisjointChainFamily {
    pub chains: Vec<AlternatingChain>,
}

impl DisjointChainFamily {
    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    pub fn union_size(&self) -> usize {
        self.chains.iter().map(|c| c.len()).sum()
    }
}

fn check_chain_budget(f: &FunctionTable) -> Result<()> {
    match f.domain() {
        DomainKind::Hypercube { d } if d > MAX_CHAIN_DP_DIM => Err(Error::Budget(format!(
            "chain DP capped at hypercube dimension {MAX_CHAIN_DP_DIM}, got {d}"
        ))),
        DomainKind::Hypergrid { .. } if f.len() > MAX_PAIRWISE_DP_POINTS => {
            Err(Error::Budget(format!(
                "pairwise chain DP capped at {MAX_PAIRWISE_DP_POINTS} points, got {}",
                f.len()
            )))
        }
        _ => Ok(()),
    }
}

/// DP state: longest alternating chain ending at each point, split by parity.
/// Odd-length chains continue with a decrease, even-length with an increase.
struct ChainDp {
    best_odd: Vec<u32>,
    best_even: Vec<u32>,
    parent_odd: Vec<usize>,
    parent_even: Vec<usize>,
}

const NO_PARENT: usize = usize::MAX;

impl ChainDp {
    fn best(&self) -> u32 {
        self.best_odd
            .iter()
            .chain(&self.best_even)
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// Reconstruct one maximum-length chain as a list of table indices.
    fn extract_chain(&self) -> Vec<usize> {
        let m = self.best();
        if m == 0 {
            return Vec::new();
        }
        let mut end = None;
        for i in 0..self.best_odd.len() {
            if self.best_odd[i] == m || self.best_even[i] == m {
                end = Some(i);
                break;
            }
        }
        let mut idx = end.unwrap();
        let mut odd = self.best_odd[idx] == m;
        let mut out = Vec::with_capacity(m as usize);
        loop {
            out.push(idx);
            let parent = if odd {
                self.parent_odd[idx]
            } else {
                self.parent_even[idx]
            };
            if parent == NO_PARENT {
                break;
            }
            idx = parent;
            odd = !odd;
        }
        out.reverse();
        out
    }
}

/// Run the chain DP over the comparability DAG of `f`, restricted to points
/// where `alive` is true (or all points when `alive` is `None`).
///
/// Hypercube tables use strict-submask enumeration (O(3^d) pair visits);
/// hypergrids fall back to the O(M^2) pairwise DP.
fn chain_dp(f: &FunctionTable, alive: Option<&[bool]>) -> ChainDp {
    let size = f.len();
    let live = |i: usize| alive.map_or(true, |a| a[i]);
    let mut dp = ChainDp {
        best_odd: vec![0; size],
        best_even: vec![0; size],
        parent_odd: vec![NO_PARENT; size],
        parent_even: vec![NO_PARENT; size],
    };
    for i in 0..size {
        if live(i) {
            dp.best_odd[i] = 1;
        }
    }
    let vals = f.values();
    let visit = |dp: &mut ChainDp, x: usize, y: usize| {
        // x strictly below y; extend chains ending at x.
        if vals[y] < vals[x] && dp.best_odd[x] > 0 && dp.best_odd[x] + 1 > dp.best_even[y] {
            dp.best_even[y] = dp.best_odd[x] + 1;
            dp.parent_even[y] = x;
        }
        if vals[y] > vals[x] && dp.best_even[x] > 0 && dp.best_even[x] + 1 > dp.best_odd[y] {
            dp.best_odd[y] = dp.best_even[x] + 1;
            dp.parent_odd[y] = x;
        }
    };
    match f.domain() {
        DomainKind::Hypercube { .. } => {
            for y in 1..size {
                if !live(y) {
                    continue;
                }
                let mut s = (y - 1) & y;
                loop {
                    if live(s) {
                        visit(&mut dp, s, y);
                    }
                    if s == 0 {
                        break;
                    }
                    s = (s - 1) & y;
                }
            }
        }
        dom @ DomainKind::Hypergrid { .. } => {
            // Indices sorted by coordinate sum are a topological order.
            let mut order: Vec<usize> = (0..size).collect();
            order.sort_by_key(|&i| f.point_at(i).weight());
            for (pos, &y) in order.iter().enumerate() {
                if !live(y) {
                    continue;
                }
                for &x in &order[..pos] {
                    if live(x) && x != y && index_dominates(&dom, x, y) {
                        visit(&mut dp, x, y);
                    }
                }
            }
        }
    }
    dp
}

/// The maximum m such that an m-alternating chain exists for `f`.
pub fn longest_alternating_chain(f: &FunctionTable) -> Result<u32> {
    check_chain_budget(f)?;
    Ok(chain_dp(f, None).best())
}

/// As [`longest_alternating_chain`], also returning one witness chain.
pub fn longest_alternating_chain_witness(f: &FunctionTable) -> Result<(u32, AlternatingChain)> {
    check_chain_budget(f)?;
    let dp = chain_dp(f, None);
    let idxs = dp.extract_chain();
    let chain = AlternatingChain {
        points: idxs.iter().map(|&i| f.point_at(i)).collect(),
        values: idxs.iter().map(|&i| f.value_at(i)).collect(),
    };
    Ok((dp.best(), chain))
}

/// True iff `f` has no (k+1)-alternating chain.
pub fn is_k_monotone(f: &FunctionTable, k: u32) -> Result<bool> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    Ok(longest_alternating_chain(f)? <= k)
}

fn enumeration_count(f: &FunctionTable) -> u128 {
    // Saturates: anything past u128 is far over every budget anyway.
    (f.r() as u128)
        .checked_pow(f.len() as u32)
        .unwrap_or(u128::MAX)
}

fn decode_table(mut code: u128, r: u32, len: usize) -> Vec<u8> {
    let mut v = vec![0u8; len];
    for slot in v.iter_mut() {
        *slot = (code % r as u128) as u8;
        code /= r as u128;
    }
    v
}

/// Exact distance to k-monotonicity by exhaustive enumeration of all
/// r^(domain size) candidate tables. This is the brute-force oracle the rest
/// of the crate is checked against; it errors out loudly when the candidate
/// count exceeds `budget`.
pub fn exact_distance_to_k_monotone(
    f: &FunctionTable,
    k: u32,
    budget: Option<u128>,
) -> Result<Rational64> {
    Ok(nearest_k_monotone(f, k, budget)?.1)
}

/// The nearest k-monotone table together with its distance.
pub fn nearest_k_monotone(
    f: &FunctionTable,
    k: u32,
    budget: Option<u128>,
) -> Result<(FunctionTable, Rational64)> {
    let budget = budget.unwrap_or(DEFAULT_ENUMERATION_BUDGET);
    let count = enumeration_count(f);
    if count > budget {
        return Err(Error::Budget(format!(
            "exact distance would enumerate {count} tables, budget is {budget}"
        )));
    }
    let len = f.len();
    let r = f.r();
    let dom = f.domain();
    let best = (0..count as u64)
        .into_par_iter()
        .map(|code| {
            let vals = decode_table(code as u128, r, len);
            let g = FunctionTable::new(dom, r, vals).expect("enumerated table is valid");
            if is_k_monotone(&g, k).expect("within budget") {
                let dist = g
                    .values()
                    .iter()
                    .zip(f.values())
                    .filter(|(a, b)| a != b)
                    .count();
                Some((dist, code))
            } else {
                None
            }
        })
        .flatten()
        .min()
        .expect("constant tables are always k-monotone");
    let g = FunctionTable::new(dom, r, decode_table(best.1 as u128, r, len))?;
    Ok((g, Rational64::new(best.0 as i64, len as i64)))
}

/// All k-monotone value tables on the given domain, in enumeration order.
pub fn enumerate_k_monotone_tables(
    dom: DomainKind,
    r: u32,
    k: u32,
    budget: Option<u128>,
) -> Result<Vec<FunctionTable>> {
    let budget = budget.unwrap_or(DEFAULT_ENUMERATION_BUDGET);
    let count = (r as u128)
        .checked_pow(dom.size() as u32)
        .unwrap_or(u128::MAX);
    if count > budget {
        return Err(Error::Budget(format!(
            "enumeration of {count} tables exceeds budget {budget}"
        )));
    }
    let mut out: Vec<FunctionTable> = (0..count as u64)
        .into_par_iter()
        .filter_map(|code| {
            let g = FunctionTable::new(dom, r, decode_table(code as u128, r, dom.size())).ok()?;
            is_k_monotone(&g, k).ok()?.then_some((code, g))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .map(|(_, g)| g)
        .collect();
    out.sort_by(|a, b| a.values().cmp(b.values()));
    Ok(out)
}

/// Distance lower bound from a family of disjoint k'-alternating chains:
/// the larger of |union C| / (3|X|) and ((k'-k)/2) * |C| / |X|.
pub fn chain_lower_bound(
    f: &FunctionTable,
    family: &DisjointChainFamily,
    k: u32,
) -> Result<Rational64> {
    if family.is_empty() {
        return Ok(Rational64::new(0, 1));
    }
    let kp = family.chains[0].len();
    if kp < 3 * k as usize {
        return Err(Error::InvalidChainFamily(format!(
            "chain length {kp} is below 3k = {}",
            3 * k
        )));
    }
    let mut seen = std::collections::HashSet::new();
    for (ci, chain) in family.chains.iter().enumerate() {
        if chain.len() != kp {
            return Err(Error::InvalidChainFamily(format!(
                "chain {ci} has length {} but the family length is {kp}",
                chain.len()
            )));
        }
        chain.validate_for(f).map_err(|e| {
            Error::InvalidChainFamily(format!("chain {ci} is not alternating for f: {e}"))
        })?;
        for p in &chain.points {
            if !seen.insert(p.clone()) {
                return Err(Error::InvalidChainFamily(format!(
                    "chain {ci} shares point {p} with another chain"
                )));
            }
        }
    }
    let x = f.len() as i64;
    let union_bound = Rational64::new(family.union_size() as i64, 3 * x);
    let proof_bound = Rational64::new((kp as i64 - k as i64) * family.len() as i64, 2 * x);
    Ok(union_bound.max(proof_bound))
}

/// Greedily extract vertex-disjoint k'-alternating chains: repeatedly run the
/// chain DP on the remaining points, peel off the first k' points of a
/// longest chain, and mark them used. Never claims maximality.
pub fn greedy_disjoint_chains(f: &FunctionTable, k_prime: usize) -> Result<DisjointChainFamily> {
    check_chain_budget(f)?;
    if k_prime == 0 {
        return Err(Error::InvalidParameter("k' must be >= 1".into()));
    }
    let mut alive = vec![true; f.len()];
    let mut chains = Vec::new();
    loop {
        let dp = chain_dp(f, Some(&alive));
        if (dp.best() as usize) < k_prime {
            break;
        }
        let idxs = dp.extract_chain();
        // A prefix of an alternating chain is alternating.
        let idxs = &idxs[..k_prime];
        for &i in idxs {
            alive[i] = false;
        }
        chains.push(AlternatingChain {
            points: idxs.iter().map(|&i| f.point_at(i)).collect(),
            values: idxs.iter().map(|&i| f.value_at(i)).collect(),
        });
    }
    Ok(DisjointChainFamily { chains })
}

/// Longest alternating chain within an explicit labeled sample (O(s^2) pair
/// visits), returning the indices of one witness of maximum length.
pub fn longest_alternating_chain_in_sample(sample: &[(Point, u8)]) -> Result<(u32, Vec<usize>)> {
    let s = sample.len();
    let mut best_odd = vec![1u32; s];
    let mut best_even = vec![0u32; s];
    let mut parent_odd = vec![NO_PARENT; s];
    let mut parent_even = vec![NO_PARENT; s];
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by_key(|&i| sample[i].0.weight());
    for (pos, &y) in order.iter().enumerate() {
        for &x in &order[..pos] {
            if sample[x].0 == sample[y].0 || !is_comparable(&sample[x].0, &sample[y].0)? {
                continue;
            }
            let (vx, vy) = (sample[x].1, sample[y].1);
            if vy < vx && best_odd[x] + 1 > best_even[y] {
                best_even[y] = best_odd[x] + 1;
                parent_even[y] = x;
            }
            if vy > vx && best_even[x] > 0 && best_even[x] + 1 > best_odd[y] {
                best_odd[y] = best_even[x] + 1;
                parent_odd[y] = x;
            }
        }
    }
    let m = best_odd.iter().chain(&best_even).copied().max().unwrap_or(0);
    if m == 0 {
        return Ok((0, Vec::new()));
    }
    let mut end = 0;
    let mut odd = true;
    for i in 0..s {
        if best_odd[i] == m {
            end = i;
            odd = true;
            break;
        }
        if best_even[i] == m {
            end = i;
            odd = false;
            break;
        }
    }
    let mut out = Vec::new();
    let mut idx = end;
    loop {
        out.push(idx);
        let p = if odd { parent_odd[idx] } else { parent_even[idx] };
        if p == NO_PARENT {
            break;
        }
        idx = p;
        odd = !odd;
    }
    out.reverse();
    Ok((m, out))
}
