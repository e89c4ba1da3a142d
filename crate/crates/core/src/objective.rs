//! Set functions over seed sets, as seen by the optimizers.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::cascade::{SpreadEstimator, SpreadVector};
use crate::utility::{self, AdimFamily, AdimUtility, SdimUtility, Similarity};
use crate::NodeId;

/// A real-valued set function `f(S)`.
pub trait Objective {
    fn value(&self, set: &[NodeId]) -> f64;

    /// `f(S ∪ {x}) − f(S)` for every candidate, where `base = f(S)`.
    fn gains(&self, set: &[NodeId], base: f64, candidates: &[NodeId]) -> Vec<f64> {
        let mut extended = Vec::with_capacity(set.len() + 1);
        extended.extend_from_slice(set);
        extended.push(0);
        candidates
            .iter()
            .map(|&x| {
                *extended.last_mut().unwrap() = x;
                self.value(&extended) - base
            })
            .collect()
    }

    /// Monte-Carlo standard error of `value(set)`, when it is an estimate.
    fn std_err(&self, _set: &[NodeId]) -> Option<f64> {
        None
    }

    /// True when the function is known to be monotone submodular as
    /// evaluated (exact, or estimated with common random numbers), which
    /// is what lazy evaluation relies on.
    fn certifies_submodular(&self) -> bool {
        false
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn value(&self, set: &[NodeId]) -> f64 {
        (**self).value(set)
    }

    fn gains(&self, set: &[NodeId], base: f64, candidates: &[NodeId]) -> Vec<f64> {
        (**self).gains(set, base, candidates)
    }

    fn std_err(&self, set: &[NodeId]) -> Option<f64> {
        (**self).std_err(set)
    }

    fn certifies_submodular(&self) -> bool {
        (**self).certifies_submodular()
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn value(&self, set: &[NodeId]) -> f64 {
        (**self).value(set)
    }

    fn gains(&self, set: &[NodeId], base: f64, candidates: &[NodeId]) -> Vec<f64> {
        (**self).gains(set, base, candidates)
    }

    fn std_err(&self, set: &[NodeId]) -> Option<f64> {
        (**self).std_err(set)
    }

    fn certifies_submodular(&self) -> bool {
        (**self).certifies_submodular()
    }
}

/// Wraps a closure.
pub struct FnObjective<F> {
    f: F,
    submodular: bool,
}

impl<F: Fn(&[NodeId]) -> f64> FnObjective<F> {
    pub fn new(f: F) -> Self {
        Self { f, submodular: false }
    }

    /// Declares the closure monotone submodular.
    pub fn submodular(mut self) -> Self {
        self.submodular = true;
        self
    }
}

impl<F: Fn(&[NodeId]) -> f64> Objective for FnObjective<F> {
    fn value(&self, set: &[NodeId]) -> f64 {
        (self.f)(set)
    }

    fn certifies_submodular(&self) -> bool {
        self.submodular
    }
}

/// Anything that yields a spread vector for a seed set.
///
/// Implementations assume valid node ids; callers validate the candidate
/// universe up front.
pub trait SpreadSource {
    fn spread(&self, seeds: &[NodeId]) -> SpreadVector;
    fn community_count(&self) -> usize;

    /// True when all seed sets are scored against the same realizations
    /// (exact expectation, or common random numbers), so monotonicity and
    /// submodularity of the expectation carry over to the estimates.
    fn is_coupled(&self) -> bool {
        false
    }
}

impl<T: SpreadSource + ?Sized> SpreadSource for &T {
    fn spread(&self, seeds: &[NodeId]) -> SpreadVector {
        (**self).spread(seeds)
    }

    fn community_count(&self) -> usize {
        (**self).community_count()
    }

    fn is_coupled(&self) -> bool {
        (**self).is_coupled()
    }
}

impl SpreadSource for SpreadEstimator<'_> {
    /// # Panics
    ///
    /// On seed ids outside the network.
    fn spread(&self, seeds: &[NodeId]) -> SpreadVector {
        self.estimate(seeds).expect("seed ids are validated by the caller")
    }

    fn community_count(&self) -> usize {
        self.communities().count()
    }

    fn is_coupled(&self) -> bool {
        self.sampling() == crate::cascade::Sampling::LiveEdge
    }
}

/// Memoizes another source by (sorted) seed set.
pub struct CachedSource<S> {
    inner: S,
    cache: Mutex<HashMap<Vec<NodeId>, SpreadVector>>,
}

impl<S: SpreadSource> CachedSource<S> {
    pub fn new(inner: S) -> Self {
        Self {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    pub fn len(&self) -> usize {
        self.cache.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<S: SpreadSource> SpreadSource for CachedSource<S> {
    fn spread(&self, seeds: &[NodeId]) -> SpreadVector {
        let mut key = seeds.to_vec();
        key.sort_unstable();
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let sv = self.inner.spread(&key);
        self.cache.lock().unwrap().insert(key, sv.clone());
        sv
    }

    fn community_count(&self) -> usize {
        self.inner.community_count()
    }

    fn is_coupled(&self) -> bool {
        self.inner.is_coupled()
    }
}

fn reported_err(sv: &SpreadVector, err: f64) -> Option<f64> {
    (sv.trials > 0).then_some(err)
}

/// Global spread `σ(S)`.
pub struct GlobalSpread<S>(pub S);

impl<S: SpreadSource> Objective for GlobalSpread<S> {
    fn value(&self, set: &[NodeId]) -> f64 {
        self.0.spread(set).global
    }

    fn std_err(&self, set: &[NodeId]) -> Option<f64> {
        let sv = self.0.spread(set);
        reported_err(&sv, sv.global_std_err)
    }

    fn certifies_submodular(&self) -> bool {
        self.0.is_coupled()
    }
}

/// `F(α_1 σ_1(S), …, α_C σ_C(S))`.
pub struct AdimObjective<S> {
    source: S,
    utility: AdimUtility,
}

impl<S: SpreadSource> AdimObjective<S> {
    /// # Panics
    ///
    /// If the utility has a different number of communities than the source.
    pub fn new(source: S, utility: AdimUtility) -> Self {
        assert_eq!(source.community_count(), utility.community_count());
        Self { source, utility }
    }

    pub fn utility(&self) -> &AdimUtility {
        &self.utility
    }

    pub fn source(&self) -> &S {
        &self.source
    }
}

impl<S: SpreadSource> Objective for AdimObjective<S> {
    fn value(&self, set: &[NodeId]) -> f64 {
        utility::adim_value(&self.utility, &self.source.spread(set))
    }

    fn std_err(&self, set: &[NodeId]) -> Option<f64> {
        let sv = self.source.spread(set);
        let err = self.utility.std_err(&sv.per_community, &sv.per_community_std_err);
        reported_err(&sv, err)
    }

    fn certifies_submodular(&self) -> bool {
        self.utility.family() == (AdimFamily::Ces { rho: 1.0 }) && self.source.is_coupled()
    }
}

/// `Σ_c (α_c σ_c(S))^ρ`, the CES utility raised to the power `ρ`. It has
/// the same maximizers as CES and is submodular whenever each `σ_c` is.
pub struct CesPower<S> {
    source: S,
    alpha: Vec<f64>,
    rho: f64,
}

impl<S: SpreadSource> CesPower<S> {
    /// `None` unless the utility is CES.
    pub fn new(source: S, utility: &AdimUtility) -> Option<Self> {
        match utility.family() {
            AdimFamily::Ces { rho } => {
                assert_eq!(source.community_count(), utility.community_count());
                Some(Self {
                    source,
                    alpha: utility.alpha().to_vec(),
                    rho,
                })
            }
            _ => None,
        }
    }
}

impl<S: SpreadSource> Objective for CesPower<S> {
    fn value(&self, set: &[NodeId]) -> f64 {
        let sv = self.source.spread(set);
        sv.per_community
            .iter()
            .zip(&self.alpha)
            .map(|(s, a)| (a * s).powf(self.rho))
            .sum()
    }

    fn certifies_submodular(&self) -> bool {
        self.source.is_coupled()
    }
}

/// `α_c σ_c(S)` for one community.
pub struct CommunityBound<S> {
    source: S,
    community: usize,
    weight: f64,
}

impl<S: SpreadSource> CommunityBound<S> {
    pub fn new(source: S, community: usize, weight: f64) -> Self {
        assert!(community < source.community_count());
        Self {
            source,
            community,
            weight,
        }
    }
}

impl<S: SpreadSource> Objective for CommunityBound<S> {
    fn value(&self, set: &[NodeId]) -> f64 {
        self.weight * self.source.spread(set).per_community[self.community]
    }

    fn std_err(&self, set: &[NodeId]) -> Option<f64> {
        let sv = self.source.spread(set);
        reported_err(&sv, self.weight * sv.per_community_std_err[self.community])
    }

    fn certifies_submodular(&self) -> bool {
        self.source.is_coupled()
    }
}

/// `(1/C) Σ_c α_c σ_c(S)`.
pub struct MeanBound<S> {
    source: S,
    alpha: Vec<f64>,
}

impl<S: SpreadSource> MeanBound<S> {
    pub fn new(source: S, alpha: Vec<f64>) -> Self {
        assert_eq!(source.community_count(), alpha.len());
        Self { source, alpha }
    }
}

impl<S: SpreadSource> Objective for MeanBound<S> {
    fn value(&self, set: &[NodeId]) -> f64 {
        let sv = self.source.spread(set);
        let total: f64 = sv.per_community.iter().zip(&self.alpha).map(|(s, a)| s * a).sum();
        total / self.alpha.len() as f64
    }

    fn certifies_submodular(&self) -> bool {
        self.source.is_coupled()
    }
}

/// Monotone submodular upper bounds used by the sandwich strategy:
/// `α_c σ_c` per community for complements, the weighted mean for
/// Cobb-Douglas, and none for CES (which is optimized directly).
pub fn adim_upper_bounds<'s, S: SpreadSource + ?Sized>(
    source: &'s S,
    utility: &AdimUtility,
) -> Vec<Box<dyn Objective + 's>> {
    match utility.family() {
        AdimFamily::Ces { .. } => Vec::new(),
        AdimFamily::Complements => utility
            .alpha()
            .iter()
            .enumerate()
            .map(|(c, &a)| Box::new(CommunityBound::new(source, c, a)) as Box<dyn Objective>)
            .collect(),
        AdimFamily::CobbDouglas => vec![Box::new(MeanBound::new(source, utility.alpha().to_vec()))],
    }
}

/// `G(σ(S), β d̃(S))` with `d̃` taken over the utility's budget.
pub struct SdimObjective<S, M> {
    source: S,
    similarity: M,
    utility: SdimUtility,
}

impl<S: SpreadSource, M: Similarity> SdimObjective<S, M> {
    pub fn new(source: S, similarity: M, utility: SdimUtility) -> Self {
        Self {
            source,
            similarity,
            utility,
        }
    }

    pub fn utility(&self) -> &SdimUtility {
        &self.utility
    }

    pub fn diversity(&self, set: &[NodeId]) -> f64 {
        utility::tilde_from_pair_sum(utility::pair_sum(&self.similarity, set), self.utility.budget())
    }
}

impl<S: SpreadSource, M: Similarity> Objective for SdimObjective<S, M> {
    fn value(&self, set: &[NodeId]) -> f64 {
        debug_assert!(set.len() <= self.utility.budget());
        let sigma = self.source.spread(set).global;
        self.utility.value(sigma, self.diversity(set))
    }

    fn gains(&self, set: &[NodeId], base: f64, candidates: &[NodeId]) -> Vec<f64> {
        let pairs = utility::pair_sum(&self.similarity, set);
        let mut extended = Vec::with_capacity(set.len() + 1);
        extended.extend_from_slice(set);
        extended.push(0);
        candidates
            .iter()
            .map(|&x| {
                *extended.last_mut().unwrap() = x;
                let sigma = self.source.spread(&extended).global;
                let inc = utility::pair_sum_increment(&self.similarity, set, x);
                let div = utility::tilde_from_pair_sum(pairs + inc, self.utility.budget());
                self.utility.value(sigma, div) - base
            })
            .collect()
    }

    fn std_err(&self, set: &[NodeId]) -> Option<f64> {
        let sv = self.source.spread(set);
        let err = self.utility.std_err(sv.global, self.diversity(set), sv.global_std_err);
        reported_err(&sv, err)
    }
}
