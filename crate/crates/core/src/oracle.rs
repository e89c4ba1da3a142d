//! Brute-force ground truth for small instances.
//!
//! Spreads are computed exactly through the live-edge view of each model:
//! under IC every edge is independently live with probability `p_uv`; under
//! LT every node keeps at most one in-edge, `(u, v)` with probability `b_uv`
//! and none with probability `1 − Σ_u b_uv`. The cascade outcome is then the
//! set reachable from the seeds over live edges.

use itertools::Itertools;

use crate::cascade::{SpreadModel, SpreadVector};
use crate::graph::{CommunityStructure, Network};
use crate::objective::{Objective, SpreadSource};
use crate::{Error, NodeId, Result};

/// Maximum number of IC edges with `0 < p < 1`; edges with `p ∈ {0, 1}`
/// are deterministic and do not count.
pub const IC_EDGE_LIMIT: usize = 20;

/// Maximum number of LT live-edge realizations.
pub const LT_REALIZATION_LIMIT: u64 = 2_000_000;

/// Maximum number of `k`-subsets [`exhaustive_best`] will score.
pub const COMBINATION_LIMIT: u128 = 1_000_000;

/// Maximum node count for [`SpreadTable`].
pub const TABLE_NODE_LIMIT: usize = 16;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Number of live-edge realizations [`for_each_realization`] would visit.
pub fn realization_count(net: &Network, model: SpreadModel) -> Result<u64> {
    match model {
        SpreadModel::IndependentCascade => {
            let uncertain = net.edges().iter().filter(|e| e.p > 0.0 && e.p < 1.0).count();
            if uncertain > IC_EDGE_LIMIT {
                return Err(Error::EnumerationBound(format!(
                    "{uncertain} probabilistic edges exceed the limit of {IC_EDGE_LIMIT}"
                )));
            }
            Ok(1 << uncertain)
        }
        SpreadModel::LinearThreshold => {
            net.check_lt_weights()?;
            let mut total: u64 = 1;
            for v in 0..net.node_count() {
                total = total.saturating_mul(lt_options(net, v).len() as u64);
                if total > LT_REALIZATION_LIMIT {
                    return Err(Error::EnumerationBound(format!(
                        "more than {LT_REALIZATION_LIMIT} LT realizations"
                    )));
                }
            }
            Ok(total)
        }
    }
}

/// `(Some(edge index) | None, probability)` choices of node `v` under LT.
fn lt_options(net: &Network, v: NodeId) -> Vec<(Option<usize>, f64)> {
    let mut options: Vec<(Option<usize>, f64)> = net
        .in_edge_indices(v)
        .iter()
        .map(|&i| (Some(i), net.edges()[i].b))
        .filter(|&(_, b)| b > 0.0)
        .collect();
    let rest = 1.0 - options.iter().map(|&(_, b)| b).sum::<f64>();
    if rest > 0.0 {
        options.push((None, rest));
    }
    options
}

/// Calls `visit(probability, live)` for every live-edge realization, where
/// `live[i]` marks edge `i` of [`Network::edges`]. Returns the total
/// probability visited, which is one up to rounding.
pub fn for_each_realization<F>(net: &Network, model: SpreadModel, mut visit: F) -> Result<f64>
where
    F: FnMut(f64, &[bool]),
{
    realization_count(net, model)?;
    let mut live = vec![false; net.edge_count()];
    let mut total = CompensatedSum::default();
    match model {
        SpreadModel::IndependentCascade => {
            let mut uncertain = Vec::new();
            for (i, e) in net.edges().iter().enumerate() {
                if e.p >= 1.0 {
                    live[i] = true;
                } else if e.p > 0.0 {
                    uncertain.push(i);
                }
            }
            for mask in 0u64..(1 << uncertain.len()) {
                let mut prob = 1.0;
                for (bit, &i) in uncertain.iter().enumerate() {
                    let on = mask >> bit & 1 == 1;
                    live[i] = on;
                    let p = net.edges()[i].p;
                    prob *= if on { p } else { 1.0 - p };
                }
                total.add(prob);
                visit(prob, &live);
            }
        }
        SpreadModel::LinearThreshold => {
            let options: Vec<_> = (0..net.node_count())
                .map(|v| lt_options(net, v))
                .filter(|o| !o.is_empty())
                .collect();
            let mut digits = vec![0usize; options.len()];
            loop {
                live.fill(false);
                let mut prob = 1.0;
                for (opts, &d) in options.iter().zip(&digits) {
                    let (edge, p) = opts[d];
                    if let Some(i) = edge {
                        live[i] = true;
                    }
                    prob *= p;
                }
                total.add(prob);
                visit(prob, &live);

                let mut pos = 0;
                loop {
                    if pos == digits.len() {
                        return Ok(total.value());
                    }
                    digits[pos] += 1;
                    if digits[pos] < options[pos].len() {
                        break;
                    }
                    digits[pos] = 0;
                    pos += 1;
                }
            }
        }
    }
    Ok(total.value())
}

fn reach(net: &Network, live: &[bool], seeds: &[NodeId], seen: &mut [bool], stack: &mut Vec<NodeId>) {
    seen.fill(false);
    stack.clear();
    for &s in seeds {
        if !seen[s] {
            seen[s] = true;
            stack.push(s);
        }
    }
    while let Some(u) = stack.pop() {
        for i in net.out_edge_range(u) {
            let v = net.edges()[i].target;
            if live[i] && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
}

/// Exact `σ(S)`, `σ_c(S)` and in-target spread by live-edge enumeration.
pub fn exact_spread(
    net: &Network,
    model: SpreadModel,
    seeds: &[NodeId],
    communities: &CommunityStructure,
) -> Result<SpreadVector> {
    net.check_nodes(seeds)?;
    check_cover(net, communities)?;
    let c = communities.count();
    let mut global = CompensatedSum::default();
    let mut targets = CompensatedSum::default();
    let mut per = vec![CompensatedSum::default(); c];
    let mut seen = vec![false; net.node_count()];
    let mut stack = Vec::new();
    let mut counts = vec![0usize; c];
    for_each_realization(net, model, |prob, live| {
        reach(net, live, seeds, &mut seen, &mut stack);
        counts.fill(0);
        let mut size = 0usize;
        let mut in_targets = 0usize;
        for (v, _) in seen.iter().enumerate().filter(|(_, s)| **s) {
            size += 1;
            let comms = communities.communities_of(v);
            in_targets += usize::from(!comms.is_empty());
            for &cc in comms {
                counts[cc] += 1;
            }
        }
        global.add(prob * size as f64);
        targets.add(prob * in_targets as f64);
        for (acc, &k) in per.iter_mut().zip(&counts) {
            acc.add(prob * k as f64);
        }
    })?;
    let mut sv = SpreadVector::zeros(c);
    sv.global = global.value();
    sv.in_targets = targets.value();
    sv.per_community = per.iter().map(CompensatedSum::value).collect();
    Ok(sv)
}

fn check_cover(net: &Network, communities: &CommunityStructure) -> Result<()> {
    if communities.node_count() != net.node_count() {
        return Err(Error::Membership(format!(
            "community structure covers {} nodes, network has {}",
            communities.node_count(),
            net.node_count()
        )));
    }
    Ok(())
}

/// Exact spread vectors for every subset of a small network, indexed by
/// bitmask. Lookups are constant time, which makes exhaustive property
/// checks over all set pairs cheap.
#[derive(Debug, Clone)]
pub struct SpreadTable {
    node_count: usize,
    communities: usize,
    // Per mask: global, in_targets, then one entry per community.
    values: Vec<f64>,
}

impl SpreadTable {
    pub fn build(net: &Network, model: SpreadModel, communities: &CommunityStructure) -> Result<Self> {
        check_cover(net, communities)?;
        let n = net.node_count();
        if n > TABLE_NODE_LIMIT {
            return Err(Error::EnumerationBound(format!(
                "{n} nodes exceed the spread-table limit of {TABLE_NODE_LIMIT}"
            )));
        }
        let c = communities.count();
        let stride = c + 2;
        let subsets = 1usize << n;
        let mut values = vec![0.0; subsets * stride];
        let target_mask: u32 = (0..n).filter(|&v| communities.in_any(v)).map(|v| 1 << v).sum();
        let community_masks: Vec<u32> = (0..c)
            .map(|cc| {
                communities
                    .members(cc)
                    .expect("index below count")
                    .iter()
                    .map(|&v| 1u32 << v)
                    .sum()
            })
            .collect();

        let mut seen = vec![false; n];
        let mut stack = Vec::new();
        let mut single = vec![0u32; n];
        let mut reach_of = vec![0u32; subsets];
        for_each_realization(net, model, |prob, live| {
            for (v, slot) in single.iter_mut().enumerate() {
                reach(net, live, &[v], &mut seen, &mut stack);
                *slot = seen
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| **s)
                    .map(|(u, _)| 1u32 << u)
                    .sum();
            }
            for mask in 1..subsets {
                let low = mask.trailing_zeros() as usize;
                let r = reach_of[mask & (mask - 1)] | single[low];
                reach_of[mask] = r;
                let row = &mut values[mask * stride..(mask + 1) * stride];
                row[0] += prob * r.count_ones() as f64;
                row[1] += prob * (r & target_mask).count_ones() as f64;
                for (slot, &cm) in row[2..].iter_mut().zip(&community_masks) {
                    *slot += prob * (r & cm).count_ones() as f64;
                }
            }
        })?;
        Ok(Self {
            node_count: n,
            communities: c,
            values,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn mask_of(seeds: &[NodeId]) -> usize {
        seeds.iter().fold(0, |m, &u| m | 1 << u)
    }

    pub fn spread_of_mask(&self, mask: usize) -> SpreadVector {
        let stride = self.communities + 2;
        let row = &self.values[mask * stride..(mask + 1) * stride];
        let mut sv = SpreadVector::zeros(self.communities);
        sv.global = row[0];
        sv.in_targets = row[1];
        sv.per_community.copy_from_slice(&row[2..]);
        sv
    }

    /// `σ(S)` alone.
    pub fn global_of_mask(&self, mask: usize) -> f64 {
        self.values[mask * (self.communities + 2)]
    }
}

impl SpreadSource for SpreadTable {
    fn spread(&self, seeds: &[NodeId]) -> SpreadVector {
        self.spread_of_mask(Self::mask_of(seeds))
    }

    fn community_count(&self) -> usize {
        self.communities
    }

    fn is_coupled(&self) -> bool {
        true
    }
}

/// Exact spread computed on demand for each queried set.
#[derive(Debug, Clone, Copy)]
pub struct ExactSpread<'a> {
    net: &'a Network,
    model: SpreadModel,
    communities: &'a CommunityStructure,
}

impl<'a> ExactSpread<'a> {
    /// Fails up front if the instance is too large to enumerate.
    pub fn new(net: &'a Network, model: SpreadModel, communities: &'a CommunityStructure) -> Result<Self> {
        realization_count(net, model)?;
        check_cover(net, communities)?;
        Ok(Self { net, model, communities })
    }
}

impl SpreadSource for ExactSpread<'_> {
    fn spread(&self, seeds: &[NodeId]) -> SpreadVector {
        exact_spread(self.net, self.model, seeds, self.communities)
            .expect("instance validated at construction")
    }

    fn community_count(&self) -> usize {
        self.communities.count()
    }

    fn is_coupled(&self) -> bool {
        true
    }
}

/// Scores every `k`-subset of `universe` and returns the lexicographically
/// smallest maximizer (as a sorted list) together with its value.
pub fn exhaustive_best<O: Objective + ?Sized>(
    f: &O,
    k: usize,
    universe: &[NodeId],
) -> Result<(Vec<NodeId>, f64)> {
    let mut universe = universe.to_vec();
    universe.sort_unstable();
    universe.dedup();
    if k > universe.len() {
        return Err(Error::BudgetTooLarge {
            budget: k,
            universe: universe.len(),
        });
    }
    let combos = binomial(universe.len() as u128, k as u128);
    if combos > COMBINATION_LIMIT {
        return Err(Error::EnumerationBound(format!(
            "{combos} candidate sets exceed the limit of {COMBINATION_LIMIT}"
        )));
    }
    let mut best: Option<(Vec<NodeId>, f64)> = None;
    for set in universe.iter().copied().combinations(k) {
        let value = f.value(&set);
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((set, value));
        }
    }
    Ok(best.expect("at least one combination"))
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}
