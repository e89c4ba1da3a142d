//! Seed selection: greedy, lazy greedy, the sandwich strategy over upper
//! bounds, and randomized greedy for non-monotone objectives.
//!
//! Ties are always broken towards the lowest node id.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cascade::RngSpec;
use crate::objective::Objective;
use crate::{Error, NodeId, Result};

const RANDOM_GREEDY_SALT: u64 = 0x5eed_5e1e_c7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Greedy,
    LazyGreedy,
    UpperGreedy,
    RandomGreedy,
}

/// One iteration of a selection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    /// `None` when randomized greedy drew a padding element.
    pub node: Option<NodeId>,
    /// Marginal gain of the chosen element (0 for padding).
    pub gain: f64,
    /// Objective value after the step.
    pub value: f64,
    /// Real candidates in the random pool, best first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pool: Vec<NodeId>,
    /// Padding elements in the random pool.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub padding: usize,
}

fn is_zero(x: &usize) -> bool {
    *x == 0
}

/// One greedy run inside the sandwich strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichRun {
    /// `None` for the run on the objective itself, otherwise the index of
    /// the upper bound that was maximized.
    pub bound: Option<usize>,
    pub seeds: Vec<NodeId>,
    /// Objective value of the run's seeds.
    pub value: f64,
    /// Value of the maximized upper bound at the run's seeds.
    pub bound_value: Option<f64>,
    pub value_std_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub algorithm: Algorithm,
    /// Seeds in selection order.
    pub seeds: Vec<NodeId>,
    pub objective: f64,
    pub objective_std_err: Option<f64>,
    /// Solution-dependent approximation ratio, when one is certified.
    pub ratio_bound: Option<f64>,
    pub candidate_log: Vec<Step>,
    pub rng_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sandwich: Vec<SandwichRun>,
}

impl SeedResult {
    pub fn sorted_seeds(&self) -> Vec<NodeId> {
        let mut s = self.seeds.clone();
        s.sort_unstable();
        s
    }
}

fn prepare_universe(k: usize, universe: &[NodeId]) -> Result<Vec<NodeId>> {
    let mut u = universe.to_vec();
    u.sort_unstable();
    u.dedup();
    if k > u.len() {
        return Err(Error::BudgetTooLarge {
            budget: k,
            universe: u.len(),
        });
    }
    Ok(u)
}

/// Index of the largest gain, first one on ties; NaN never wins.
fn argmax(gains: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &g) in gains.iter().enumerate() {
        if g.is_nan() {
            continue;
        }
        if best.is_none_or(|b| g > gains[b]) {
            best = Some(i);
        }
    }
    best
}

fn finish<O: Objective + ?Sized>(
    f: &O,
    algorithm: Algorithm,
    seeds: Vec<NodeId>,
    objective: f64,
    candidate_log: Vec<Step>,
) -> SeedResult {
    SeedResult {
        algorithm,
        objective_std_err: f.std_err(&seeds),
        seeds,
        objective,
        ratio_bound: None,
        candidate_log,
        rng_seed: None,
        sandwich: Vec::new(),
    }
}

/// Adds the element of largest marginal gain, `k` times.
pub fn greedy<O: Objective + ?Sized>(f: &O, k: usize, universe: &[NodeId]) -> Result<SeedResult> {
    let mut remaining = prepare_universe(k, universe)?;
    let mut seeds = Vec::with_capacity(k);
    let mut log = Vec::with_capacity(k);
    let mut base = f.value(&seeds);
    for _ in 0..k {
        let gains = f.gains(&seeds, base, &remaining);
        // Every gain NaN: fall back to the lowest id.
        let i = argmax(&gains).unwrap_or(0);
        let node = remaining.remove(i);
        seeds.push(node);
        base = f.value(&seeds);
        log.push(Step {
            node: Some(node),
            gain: gains[i],
            value: base,
            pool: Vec::new(),
            padding: 0,
        });
    }
    Ok(finish(f, Algorithm::Greedy, seeds, base, log))
}

#[derive(Debug)]
struct Entry {
    bound: f64,
    node: NodeId,
    round: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Max-heap: larger bound first, then lower id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Greedy with lazily re-evaluated marginal gains. Selects the same seeds
/// as [`greedy`] for submodular objectives, so it refuses objectives that
/// do not certify submodularity.
pub fn lazy_greedy<O: Objective + ?Sized>(f: &O, k: usize, universe: &[NodeId]) -> Result<SeedResult> {
    if !f.certifies_submodular() {
        return Err(Error::InvalidArgument(
            "lazy greedy needs an objective that certifies submodularity".into(),
        ));
    }
    let remaining = prepare_universe(k, universe)?;
    let mut seeds = Vec::with_capacity(k);
    let mut log = Vec::with_capacity(k);
    let mut base = f.value(&seeds);
    let gains = f.gains(&seeds, base, &remaining);
    let mut heap: BinaryHeap<Entry> = remaining
        .iter()
        .zip(gains)
        .map(|(&node, g)| Entry {
            bound: if g.is_nan() { f64::NEG_INFINITY } else { g },
            node,
            round: 0,
        })
        .collect();
    while seeds.len() < k {
        let top = heap.pop().expect("budget checked against universe");
        if top.round == seeds.len() {
            seeds.push(top.node);
            base = f.value(&seeds);
            log.push(Step {
                node: Some(top.node),
                gain: top.bound,
                value: base,
                pool: Vec::new(),
                padding: 0,
            });
        } else {
            let g = f.gains(&seeds, base, &[top.node])[0];
            heap.push(Entry {
                bound: if g.is_nan() { f64::NEG_INFINITY } else { g },
                node: top.node,
                round: seeds.len(),
            });
        }
    }
    Ok(finish(f, Algorithm::LazyGreedy, seeds, base, log))
}

/// Sandwich strategy: runs greedy on `f` and on every upper bound, keeps
/// the candidate that is best under `f`, and certifies
/// `max_i f(S_i) / upper_i(S_i) · (1 − 1/e)`.
///
/// Every upper bound must dominate `f` pointwise; debug builds check this
/// on the candidate sets.
pub fn upper_greedy<O: Objective + ?Sized, U: Objective>(
    f: &O,
    uppers: &[U],
    k: usize,
    universe: &[NodeId],
) -> Result<SeedResult> {
    let own = greedy(f, k, universe)?;
    let mut runs = vec![SandwichRun {
        bound: None,
        seeds: own.seeds.clone(),
        value: own.objective,
        bound_value: None,
        value_std_err: own.objective_std_err,
    }];
    let mut results = vec![own];
    for (i, upper) in uppers.iter().enumerate() {
        let r = greedy(upper, k, universe)?;
        let value = f.value(&r.seeds);
        runs.push(SandwichRun {
            bound: Some(i),
            seeds: r.seeds.clone(),
            value,
            bound_value: Some(r.objective),
            value_std_err: f.std_err(&r.seeds),
        });
        results.push(r);
    }
    if cfg!(debug_assertions) {
        for run in &runs {
            for upper in uppers {
                let u = upper.value(&run.seeds);
                debug_assert!(
                    run.value <= u + 1e-9 * u.abs().max(1.0),
                    "upper bound {u} below objective {} at {:?}",
                    run.value,
                    run.seeds
                );
            }
        }
    }

    let best = runs
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.value > runs[b].value { i } else { b });
    let ratio_bound = (!uppers.is_empty()).then(|| {
        let factor = 1.0 - (-1.0f64).exp();
        runs[1..]
            .iter()
            .filter_map(|r| {
                let u = r.bound_value.unwrap();
                (u > 0.0).then(|| r.value / u)
            })
            .fold(0.0, f64::max)
            * factor
    });

    let chosen = results.swap_remove(best);
    let mut out = SeedResult {
        algorithm: Algorithm::UpperGreedy,
        objective: runs[best].value,
        objective_std_err: runs[best].value_std_err,
        seeds: chosen.seeds,
        ratio_bound,
        candidate_log: chosen.candidate_log,
        rng_seed: None,
        sandwich: runs,
    };
    if uppers.is_empty() {
        out.sandwich.clear();
    }
    Ok(out)
}

/// Randomized greedy for non-monotone objectives.
///
/// Each round ranks the remaining nodes together with `k` padding elements
/// of gain zero, keeps the best `k` (real nodes win ties against padding,
/// lower ids win ties among nodes), and adds a uniformly drawn member of
/// that pool. Drawing padding leaves the set unchanged, so the result may
/// hold fewer than `k` seeds.
pub fn random_greedy<O: Objective + ?Sized>(
    g: &O,
    k: usize,
    universe: &[NodeId],
    rng: RngSpec,
) -> Result<SeedResult> {
    let mut remaining = prepare_universe(k, universe)?;
    let mut draw = rng.derive(RANDOM_GREEDY_SALT).stream(0);
    let mut seeds = Vec::with_capacity(k);
    let mut log = Vec::with_capacity(k);
    let mut base = g.value(&seeds);
    for _ in 0..k {
        let gains = g.gains(&seeds, base, &remaining);
        let mut order: Vec<usize> = (0..remaining.len())
            .filter(|&i| gains[i] >= 0.0)
            .collect();
        order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]).then(a.cmp(&b)));
        order.truncate(k);
        let pool: Vec<NodeId> = order.iter().map(|&i| remaining[i]).collect();
        let padding = k - pool.len();
        let pick = draw.random_range(0..k);
        let step = if let Some(&i) = order.get(pick) {
            let node = remaining[i];
            let gain = gains[i];
            remaining.remove(i);
            seeds.push(node);
            base = g.value(&seeds);
            Step {
                node: Some(node),
                gain,
                value: base,
                pool,
                padding,
            }
        } else {
            Step {
                node: None,
                gain: 0.0,
                value: base,
                pool,
                padding,
            }
        };
        log.push(step);
    }
    let mut out = finish(g, Algorithm::RandomGreedy, seeds, base, log);
    out.rng_seed = Some(rng.master_seed);
    Ok(out)
}
