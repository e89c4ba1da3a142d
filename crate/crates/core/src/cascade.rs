//! Independent Cascade and Linear Threshold simulation.
//!
//! Every trial draws from its own ChaCha8 stream, selected by the trial
//! index under a fixed master seed, and each trial's outcome is tallied as
//! integer counts. Trials can therefore run on any number of threads in any
//! order and still produce bit-identical estimates.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{CommunityStructure, Network};
use crate::{Error, NodeId, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpreadModel {
    #[serde(rename = "ic")]
    IndependentCascade,
    #[serde(rename = "lt")]
    LinearThreshold,
}

impl FromStr for SpreadModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ic" => Ok(Self::IndependentCascade),
            "lt" => Ok(Self::LinearThreshold),
            other => Err(Error::InvalidArgument(format!("unknown spread model `{other}`"))),
        }
    }
}

impl fmt::Display for SpreadModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::IndependentCascade => "ic",
            Self::LinearThreshold => "lt",
        })
    }
}

/// How a trial consumes randomness.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// Round-by-round cascade; only attempted edges and touched thresholds
    /// consume random numbers.
    #[default]
    Cascade,
    /// Draw a full live-edge graph per trial before looking at the seeds, so
    /// that every seed set sees the same realization for a given trial.
    /// Outcomes are then monotone in the seed set, trial by trial.
    LiveEdge,
}

/// Master seed from which every trial stream is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub master_seed: u64,
}

impl RngSpec {
    pub const fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// The generator for stream `index` (a trial number, or any other
    /// consumer that needs its own independent sequence).
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        stream_from(&self.key(), index)
    }

    fn key(&self) -> [u8; 32] {
        ChaCha8Rng::seed_from_u64(self.master_seed).get_seed()
    }

    /// A statistically unrelated spec, deterministically derived from this one.
    pub fn derive(&self, salt: u64) -> Self {
        Self::new(splitmix64(self.master_seed ^ splitmix64(salt)))
    }
}

fn stream_from(key: &[u8; 32], index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(*key);
    rng.set_stream(index);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Expected activations, globally and per community.
///
/// `trials == 0` marks an exact value (all standard errors are zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadVector {
    /// `σ(S)`.
    pub global: f64,
    /// `σ_c(S)` for each community.
    pub per_community: Vec<f64>,
    /// Expected activations inside the union of all communities.
    pub in_targets: f64,
    pub trials: u64,
    pub global_std_err: f64,
    pub per_community_std_err: Vec<f64>,
    pub in_targets_std_err: f64,
}

impl SpreadVector {
    pub fn zeros(communities: usize) -> Self {
        Self {
            global: 0.0,
            per_community: vec![0.0; communities],
            in_targets: 0.0,
            trials: 0,
            global_std_err: 0.0,
            per_community_std_err: vec![0.0; communities],
            in_targets_std_err: 0.0,
        }
    }

    pub fn community_count(&self) -> usize {
        self.per_community.len()
    }

    /// `Σ_c σ_c(S)`.
    pub fn community_sum(&self) -> f64 {
        self.per_community.iter().sum()
    }
}

/// Activation counts of a single trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub activated: usize,
    pub in_targets: usize,
    pub per_community: Vec<usize>,
}

/// Reusable per-thread state for running trials on one network.
pub struct Simulator<'a> {
    net: &'a Network,
    model: SpreadModel,
    sampling: Sampling,
    epoch: u32,
    active: Vec<u32>,
    touched: Vec<u32>,
    live: Vec<u32>,
    weight: Vec<f64>,
    threshold: Vec<f64>,
    activated: Vec<NodeId>,
    frontier: Vec<NodeId>,
    next: Vec<NodeId>,
}

impl<'a> Simulator<'a> {
    pub fn new(net: &'a Network, model: SpreadModel, sampling: Sampling) -> Self {
        let n = net.node_count();
        Self {
            net,
            model,
            sampling,
            epoch: 0,
            active: vec![0; n],
            touched: vec![0; n],
            live: vec![0; net.edge_count()],
            weight: vec![0.0; n],
            threshold: vec![0.0; n],
            activated: Vec::new(),
            frontier: Vec::new(),
            next: Vec::new(),
        }
    }

    /// Runs one cascade from `seeds` and returns every activated node
    /// (seeds included) in activation order. Seeds must be valid node ids;
    /// duplicates are ignored.
    pub fn run<R: Rng>(&mut self, seeds: &[NodeId], rng: &mut R) -> &[NodeId] {
        self.epoch = match self.epoch.checked_add(1) {
            Some(e) => e,
            None => {
                self.active.fill(0);
                self.touched.fill(0);
                self.live.fill(0);
                1
            }
        };
        self.activated.clear();
        self.frontier.clear();
        for &s in seeds {
            if self.active[s] != self.epoch {
                self.active[s] = self.epoch;
                self.activated.push(s);
                self.frontier.push(s);
            }
        }
        self.frontier.sort_unstable();
        match (self.sampling, self.model) {
            (Sampling::Cascade, SpreadModel::IndependentCascade) => self.cascade_ic(rng),
            (Sampling::Cascade, SpreadModel::LinearThreshold) => self.cascade_lt(rng),
            (Sampling::LiveEdge, model) => {
                self.draw_live_edges(model, rng);
                self.reach_live();
            }
        }
        &self.activated
    }

    /// One round per time step; within a round, attempts run in
    /// `(source, target)` order and each edge is tried at most once.
    fn cascade_ic<R: Rng>(&mut self, rng: &mut R) {
        let epoch = self.epoch;
        while !self.frontier.is_empty() {
            self.next.clear();
            for &u in &self.frontier {
                for e in self.net.out_edges(u) {
                    let v = e.target;
                    if self.active[v] == epoch {
                        continue;
                    }
                    if e.p >= 1.0 || (e.p > 0.0 && rng.random::<f64>() < e.p) {
                        self.active[v] = epoch;
                        self.activated.push(v);
                        self.next.push(v);
                    }
                }
            }
            self.next.sort_unstable();
            std::mem::swap(&mut self.frontier, &mut self.next);
        }
    }

    /// Thresholds are drawn from `U[0, 1)` the first time a node receives
    /// weight; a node activates in the round after its accumulated weight
    /// reaches its threshold.
    fn cascade_lt<R: Rng>(&mut self, rng: &mut R) {
        let epoch = self.epoch;
        while !self.frontier.is_empty() {
            self.next.clear();
            for &u in &self.frontier {
                for e in self.net.out_edges(u) {
                    let v = e.target;
                    if self.active[v] == epoch {
                        continue;
                    }
                    if self.touched[v] != epoch {
                        self.touched[v] = epoch;
                        self.weight[v] = 0.0;
                        self.threshold[v] = rng.random::<f64>();
                    }
                    self.weight[v] += e.b;
                    self.next.push(v);
                }
            }
            self.next.sort_unstable();
            self.next.dedup();
            let (active, weight, threshold) = (&mut self.active, &self.weight, &self.threshold);
            self.next.retain(|&v| {
                let fire = weight[v] >= threshold[v];
                if fire {
                    active[v] = epoch;
                }
                fire
            });
            self.activated.extend_from_slice(&self.next);
            std::mem::swap(&mut self.frontier, &mut self.next);
        }
    }

    fn draw_live_edges<R: Rng>(&mut self, model: SpreadModel, rng: &mut R) {
        let epoch = self.epoch;
        match model {
            SpreadModel::IndependentCascade => {
                for (i, e) in self.net.edges().iter().enumerate() {
                    if e.p >= 1.0 || (e.p > 0.0 && rng.random::<f64>() < e.p) {
                        self.live[i] = epoch;
                    }
                }
            }
            SpreadModel::LinearThreshold => {
                // Each node keeps at most one in-edge, edge (u, v) with probability b_uv.
                for v in 0..self.net.node_count() {
                    let incoming = self.net.in_edge_indices(v);
                    if incoming.is_empty() {
                        continue;
                    }
                    let r = rng.random::<f64>();
                    let mut cumulative = 0.0;
                    for &i in incoming {
                        cumulative += self.net.edges()[i].b;
                        if r < cumulative {
                            self.live[i] = epoch;
                            break;
                        }
                    }
                }
            }
        }
    }

    fn reach_live(&mut self) {
        let epoch = self.epoch;
        let mut cursor = 0;
        while cursor < self.activated.len() {
            let u = self.activated[cursor];
            cursor += 1;
            for i in self.net.out_edge_range(u) {
                let v = self.net.edges()[i].target;
                if self.live[i] == epoch && self.active[v] != epoch {
                    self.active[v] = epoch;
                    self.activated.push(v);
                }
            }
        }
    }
}

/// Runs trial `trial` of the stream family `rng` and returns the activated
/// set, sorted.
pub fn simulate_once(
    net: &Network,
    model: SpreadModel,
    seeds: &[NodeId],
    rng: RngSpec,
    trial: u64,
) -> Result<Vec<NodeId>> {
    net.check_nodes(seeds)?;
    if model == SpreadModel::LinearThreshold {
        net.check_lt_weights()?;
    }
    let mut sim = Simulator::new(net, model, Sampling::Cascade);
    let mut out = sim.run(seeds, &mut rng.stream(trial)).to_vec();
    out.sort_unstable();
    Ok(out)
}

/// Monte-Carlo estimator of [`SpreadVector`]s with a fixed trial count and
/// master seed. Repeated calls with the same seed set return identical
/// results, so the estimator behaves as a deterministic set function.
#[derive(Debug, Clone)]
pub struct SpreadEstimator<'a> {
    net: &'a Network,
    communities: &'a CommunityStructure,
    model: SpreadModel,
    trials: u64,
    rng: RngSpec,
    key: [u8; 32],
    sampling: Sampling,
}

impl<'a> SpreadEstimator<'a> {
    pub fn new(
        net: &'a Network,
        communities: &'a CommunityStructure,
        model: SpreadModel,
        trials: u64,
        rng: RngSpec,
    ) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidArgument("trial count must be at least 1".into()));
        }
        if communities.node_count() != net.node_count() {
            return Err(Error::Membership(format!(
                "community structure covers {} nodes, network has {}",
                communities.node_count(),
                net.node_count()
            )));
        }
        if model == SpreadModel::LinearThreshold {
            net.check_lt_weights()?;
        }
        Ok(Self {
            net,
            communities,
            model,
            trials,
            rng,
            key: rng.key(),
            sampling: Sampling::Cascade,
        })
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling
    }

    pub fn network(&self) -> &'a Network {
        self.net
    }

    pub fn communities(&self) -> &'a CommunityStructure {
        self.communities
    }

    pub fn model(&self) -> SpreadModel {
        self.model
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn rng(&self) -> RngSpec {
        self.rng
    }

    /// Same estimator with a different trial count and seed.
    pub fn with_trials(&self, trials: u64, rng: RngSpec) -> Result<Self> {
        Ok(Self::new(self.net, self.communities, self.model, trials, rng)?.with_sampling(self.sampling))
    }

    pub fn estimate(&self, seeds: &[NodeId]) -> Result<SpreadVector> {
        self.net.check_nodes(seeds)?;
        let c = self.communities.count();
        let tally = (0..self.trials)
            .into_par_iter()
            .fold(
                || (self.simulator(), Tally::new(c)),
                |(mut sim, mut tally), t| {
                    let activated = sim.run(seeds, &mut stream_from(&self.key, t));
                    tally.add(activated, self.communities);
                    (sim, tally)
                },
            )
            .map(|(_, tally)| tally)
            .reduce(|| Tally::new(c), Tally::merge);
        Ok(tally.finish())
    }

    /// Per-trial counts in trial order. Their column means equal
    /// [`SpreadEstimator::estimate`] exactly.
    pub fn outcomes(&self, seeds: &[NodeId]) -> Result<Vec<TrialOutcome>> {
        self.net.check_nodes(seeds)?;
        Ok((0..self.trials)
            .into_par_iter()
            .map_init(
                || self.simulator(),
                |sim, t| {
                    let activated = sim.run(seeds, &mut stream_from(&self.key, t));
                    let mut per_community = vec![0; self.communities.count()];
                    let mut in_targets = 0;
                    for &v in activated {
                        let cs = self.communities.communities_of(v);
                        in_targets += usize::from(!cs.is_empty());
                        for &c in cs {
                            per_community[c] += 1;
                        }
                    }
                    TrialOutcome {
                        trial: t,
                        activated: activated.len(),
                        in_targets,
                        per_community,
                    }
                },
            )
            .collect())
    }

    fn simulator(&self) -> Simulator<'a> {
        Simulator::new(self.net, self.model, self.sampling)
    }
}

/// Monte-Carlo estimate of `σ(S)` and every `σ_c(S)` from `trials` runs.
pub fn estimate_spread(
    net: &Network,
    model: SpreadModel,
    seeds: &[NodeId],
    communities: &CommunityStructure,
    trials: u64,
    rng: RngSpec,
) -> Result<SpreadVector> {
    SpreadEstimator::new(net, communities, model, trials, rng)?.estimate(seeds)
}

/// Integer sums of counts and squared counts.
#[derive(Debug, Clone)]
struct Tally {
    trials: u64,
    global: Moments,
    in_targets: Moments,
    per_community: Vec<Moments>,
    scratch: Vec<u64>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: u64,
    sum_sq: u128,
}

impl Moments {
    fn add(&mut self, x: u64) {
        self.sum += x;
        self.sum_sq += u128::from(x) * u128::from(x);
    }

    fn merge(self, other: Self) -> Self {
        Self {
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }

    fn mean_and_std_err(&self, trials: u64) -> (f64, f64) {
        let m = trials as f64;
        let mean = self.sum as f64 / m;
        if trials < 2 {
            return (mean, 0.0);
        }
        let sum = self.sum as f64;
        let var = ((self.sum_sq as f64 - sum * sum / m) / (m - 1.0)).max(0.0);
        (mean, (var / m).sqrt())
    }
}

impl Tally {
    fn new(communities: usize) -> Self {
        Self {
            trials: 0,
            global: Moments::default(),
            in_targets: Moments::default(),
            per_community: vec![Moments::default(); communities],
            scratch: vec![0; communities],
        }
    }

    fn add(&mut self, activated: &[NodeId], cs: &CommunityStructure) {
        self.trials += 1;
        self.global.add(activated.len() as u64);
        self.scratch.fill(0);
        let mut targets = 0;
        for &v in activated {
            let comms = cs.communities_of(v);
            targets += u64::from(!comms.is_empty());
            for &c in comms {
                self.scratch[c] += 1;
            }
        }
        self.in_targets.add(targets);
        for (m, &x) in self.per_community.iter_mut().zip(&self.scratch) {
            m.add(x);
        }
    }

    fn merge(self, other: Self) -> Self {
        Self {
            trials: self.trials + other.trials,
            global: self.global.merge(other.global),
            in_targets: self.in_targets.merge(other.in_targets),
            per_community: self
                .per_community
                .iter()
                .zip(&other.per_community)
                .map(|(a, b)| a.merge(*b))
                .collect(),
            scratch: self.scratch,
        }
    }

    fn finish(self) -> SpreadVector {
        let t = self.trials;
        let (global, global_std_err) = self.global.mean_and_std_err(t);
        let (in_targets, in_targets_std_err) = self.in_targets.mean_and_std_err(t);
        let (per_community, per_community_std_err) = self
            .per_community
            .iter()
            .map(|m| m.mean_and_std_err(t))
            .unzip();
        SpreadVector {
            global,
            per_community,
            in_targets,
            trials: t,
            global_std_err,
            per_community_std_err,
            in_targets_std_err,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NetworkBuilder;

    fn path(p: f64) -> Network {
        NetworkBuilder::new(3).edge_p(0, 1, p).edge_p(1, 2, p).build().unwrap()
    }

    #[test]
    fn zero_probability_activates_only_seeds() {
        let net = path(0.0);
        for t in 0..20 {
            assert_eq!(
                simulate_once(&net, SpreadModel::IndependentCascade, &[0], RngSpec::new(1), t).unwrap(),
                vec![0]
            );
        }
    }

    #[test]
    fn unit_probability_is_reachability() {
        let net = path(1.0);
        let out = simulate_once(&net, SpreadModel::IndependentCascade, &[0], RngSpec::new(1), 0).unwrap();
        assert_eq!(out, vec![0, 1, 2]);
        let out = simulate_once(&net, SpreadModel::IndependentCascade, &[1], RngSpec::new(1), 0).unwrap();
        assert_eq!(out, vec![1, 2]);
    }

    #[test]
    fn lt_single_full_weight_edge_always_fires() {
        let net = NetworkBuilder::new(2)
            .edge_with(0, 1, None, Some(1.0))
            .build()
            .unwrap();
        for t in 0..100 {
            let out = simulate_once(&net, SpreadModel::LinearThreshold, &[0], RngSpec::new(9), t).unwrap();
            assert_eq!(out, vec![0, 1]);
        }
    }

    #[test]
    fn unknown_seed_is_rejected() {
        let net = path(0.5);
        assert!(matches!(
            simulate_once(&net, SpreadModel::IndependentCascade, &[3], RngSpec::new(0), 0),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn all_seeds_give_exact_node_count() {
        let net = path(0.3);
        let cs = CommunityStructure::whole(3);
        let sv = estimate_spread(&net, SpreadModel::IndependentCascade, &[0, 1, 2], &cs, 500, RngSpec::new(4))
            .unwrap();
        assert_eq!(sv.global, 3.0);
        assert_eq!(sv.global_std_err, 0.0);
        assert_eq!(sv.per_community, vec![3.0]);
    }

    #[test]
    fn estimate_is_deterministic_and_matches_outcomes() {
        let net = path(0.5);
        let cs = CommunityStructure::from_members(3, &[vec![1, 2]]).unwrap();
        for sampling in [Sampling::Cascade, Sampling::LiveEdge] {
            let est = SpreadEstimator::new(&net, &cs, SpreadModel::IndependentCascade, 2000, RngSpec::new(7))
                .unwrap()
                .with_sampling(sampling);
            let a = est.estimate(&[0]).unwrap();
            let b = est.estimate(&[0]).unwrap();
            assert_eq!(a, b);
            let outcomes = est.outcomes(&[0]).unwrap();
            let mean = outcomes.iter().map(|o| o.activated as u64).sum::<u64>() as f64 / 2000.0;
            assert_eq!(mean, a.global);
            let c0 = outcomes.iter().map(|o| o.per_community[0] as u64).sum::<u64>() as f64 / 2000.0;
            assert_eq!(c0, a.per_community[0]);
        }
    }

    #[test]
    fn derived_specs_differ() {
        let r = RngSpec::new(5);
        assert_ne!(r.derive(1), r.derive(2));
        assert_eq!(r.derive(1), r.derive(1));
    }

    #[test]
    fn rejects_zero_trials_and_mismatched_communities() {
        let net = path(0.5);
        let cs = CommunityStructure::whole(3);
        assert!(SpreadEstimator::new(&net, &cs, SpreadModel::IndependentCascade, 0, RngSpec::new(0)).is_err());
        let other = CommunityStructure::whole(4);
        assert!(SpreadEstimator::new(&net, &other, SpreadModel::IndependentCascade, 1, RngSpec::new(0)).is_err());
    }
}
