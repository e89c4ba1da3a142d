//! Utility families and seed-diversity measures.
//!
//! Audience utilities aggregate the weighted per-community spreads
//! `x_c = α_c σ_c(S)`:
//!
//! ```text
//! CES          (Σ_c x_c^ρ)^(1/ρ),  0 < ρ ≤ 1   (ρ = 1: perfect substitutes)
//! Complements  min_c x_c
//! Cobb-Douglas (Π_c x_c)^(1/C)
//! ```
//!
//! Seed utilities combine global spread with seed diversity
//! `d̃(S) = 1 − Σ_{u≠v∈S} sim(u, v) / (k(k−1))`:
//!
//! ```text
//! Substitutes  σ + β d̃
//! Complements  min(σ, β d̃)
//! Cobb-Douglas σ^a d̃^b        (the constant factor β^b is dropped)
//! ```

use serde::{Deserialize, Serialize};

use crate::cascade::SpreadVector;
use crate::graph::{CommunityStructure, EmbeddingTable};
use crate::{Error, NodeId, Result};

/// `(Σ x_c^ρ)^(1/ρ)`. With `ρ = 1` this is the plain sum.
pub fn ces(x: &[f64], rho: f64) -> f64 {
    if rho == 1.0 {
        return x.iter().sum();
    }
    x.iter().map(|v| v.powf(rho)).sum::<f64>().powf(1.0 / rho)
}

/// `min_c x_c`; zero for an empty slice.
pub fn leontief(x: &[f64]) -> f64 {
    x.iter().copied().reduce(f64::min).unwrap_or(0.0)
}

/// `(Π x_c)^(1/C)`, computed in log space. Any zero coordinate gives zero.
pub fn cobb_douglas(x: &[f64]) -> f64 {
    if x.is_empty() || x.iter().any(|&v| v <= 0.0) {
        return 0.0;
    }
    (x.iter().map(|v| v.ln()).sum::<f64>() / x.len() as f64).exp()
}

pub fn g_substitutes(x1: f64, x2: f64) -> f64 {
    x1 + x2
}

pub fn g_complements(x1: f64, x2: f64) -> f64 {
    x1.min(x2)
}

pub fn g_cobb_douglas(x1: f64, x2: f64, a: f64, b: f64) -> f64 {
    x1.powf(a) * x2.powf(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum AdimFamily {
    Ces { rho: f64 },
    Complements,
    CobbDouglas,
}

/// An audience utility `F(α_1 σ_1, …, α_C σ_C)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdimUtility {
    family: AdimFamily,
    alpha: Vec<f64>,
}

impl AdimUtility {
    pub fn new(family: AdimFamily, alpha: Vec<f64>) -> Result<Self> {
        if let AdimFamily::Ces { rho } = family {
            if !(rho > 0.0 && rho <= 1.0) {
                return Err(Error::InvalidArgument(format!("CES ρ = {rho} is outside (0, 1]")));
            }
        }
        if alpha.is_empty() {
            return Err(Error::InvalidArgument("α needs one weight per community".into()));
        }
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::InvalidArgument(format!("community weight α = {a} must be positive")));
        }
        Ok(Self { family, alpha })
    }

    /// Perfect substitutes: `Σ_c α_c σ_c`.
    pub fn substitutes(alpha: Vec<f64>) -> Result<Self> {
        Self::new(AdimFamily::Ces { rho: 1.0 }, alpha)
    }

    pub fn family(&self) -> AdimFamily {
        self.family
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn community_count(&self) -> usize {
        self.alpha.len()
    }

    /// `α_c σ_c` for every community.
    pub fn weighted(&self, spreads: &[f64]) -> Vec<f64> {
        assert_eq!(
            spreads.len(),
            self.alpha.len(),
            "spread vector and α have different lengths"
        );
        spreads.iter().zip(&self.alpha).map(|(s, a)| s * a).collect()
    }

    /// Utility of per-community spreads `σ_1 … σ_C`.
    pub fn value(&self, spreads: &[f64]) -> f64 {
        let x = self.weighted(spreads);
        match self.family {
            AdimFamily::Ces { rho } => ces(&x, rho),
            AdimFamily::Complements => leontief(&x),
            AdimFamily::CobbDouglas => cobb_douglas(&x),
        }
    }

    /// First-order standard error of [`AdimUtility::value`] given
    /// independent standard errors of each `σ_c` (cross-community
    /// covariance is ignored).
    pub fn std_err(&self, spreads: &[f64], std_errs: &[f64]) -> f64 {
        let x = self.weighted(spreads);
        let f = self.value(spreads);
        match self.family {
            AdimFamily::Ces { rho } => x
                .iter()
                .zip(&self.alpha)
                .zip(std_errs)
                .filter(|((xc, _), _)| **xc > 0.0)
                .map(|((xc, a), se)| (a * xc.powf(rho - 1.0) * f.powf(1.0 - rho) * se).powi(2))
                .sum::<f64>()
                .sqrt(),
            AdimFamily::Complements => x
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map_or(0.0, |(c, _)| self.alpha[c] * std_errs[c]),
            AdimFamily::CobbDouglas => {
                if f == 0.0 {
                    return 0.0;
                }
                let rel: f64 = spreads
                    .iter()
                    .zip(std_errs)
                    .map(|(s, se)| (se / s).powi(2))
                    .sum();
                f / x.len() as f64 * rel.sqrt()
            }
        }
    }
}

/// `F(α_1 σ_1(S), …, α_C σ_C(S))` for a spread vector.
pub fn adim_value(utility: &AdimUtility, spread: &SpreadVector) -> f64 {
    utility.value(&spread.per_community)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SdimFamily {
    Substitutes,
    Complements,
    CobbDouglas { a: f64, b: f64 },
}

/// A seed utility `G(σ(S), β d̃(S))` for budget `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdimUtility {
    family: SdimFamily,
    beta: f64,
    budget: usize,
}

impl SdimUtility {
    pub fn new(family: SdimFamily, beta: f64, budget: usize) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidArgument(format!("β = {beta} must be positive")));
        }
        if budget < 2 {
            return Err(Error::InvalidArgument(format!(
                "seed diversity needs a budget of at least 2, got {budget}"
            )));
        }
        if let SdimFamily::CobbDouglas { a, b } = family {
            let unit = |x: f64| x > 0.0 && x <= 1.0;
            if !(unit(a) && unit(b) && (a + b - 1.0).abs() <= 1e-12) {
                return Err(Error::InvalidArgument(format!(
                    "Cobb-Douglas exponents a = {a}, b = {b} must lie in (0, 1] and sum to 1"
                )));
            }
        }
        Ok(Self { family, beta, budget })
    }

    pub fn family(&self) -> SdimFamily {
        self.family
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Utility of global spread `σ` and diversity `d̃`.
    pub fn value(&self, spread: f64, diversity: f64) -> f64 {
        match self.family {
            SdimFamily::Substitutes => g_substitutes(spread, self.beta * diversity),
            SdimFamily::Complements => g_complements(spread, self.beta * diversity),
            SdimFamily::CobbDouglas { a, b } => g_cobb_douglas(spread, diversity, a, b),
        }
    }

    /// `|∂G/∂σ|` times the standard error of `σ`.
    pub fn std_err(&self, spread: f64, diversity: f64, spread_std_err: f64) -> f64 {
        let slope = match self.family {
            SdimFamily::Substitutes => 1.0,
            SdimFamily::Complements => {
                if spread <= self.beta * diversity {
                    1.0
                } else {
                    0.0
                }
            }
            SdimFamily::CobbDouglas { a, b } => {
                if spread > 0.0 {
                    a * spread.powf(a - 1.0) * diversity.powf(b)
                } else {
                    0.0
                }
            }
        };
        slope * spread_std_err
    }
}

pub fn sdim_value(utility: &SdimUtility, spread: f64, diversity: f64) -> f64 {
    utility.value(spread, diversity)
}

/// Pairwise node similarity with values in `[0, 1]`.
pub trait Similarity {
    fn similarity(&self, u: NodeId, v: NodeId) -> f64;
    fn node_count(&self) -> usize;
}

impl<T: Similarity + ?Sized> Similarity for &T {
    fn similarity(&self, u: NodeId, v: NodeId) -> f64 {
        (**self).similarity(u, v)
    }

    fn node_count(&self) -> usize {
        (**self).node_count()
    }
}

/// `1 − exp(−F_u · F_v)` over community memberships. For disjoint
/// communities this is `1 − 1/e` within a community and 0 across.
#[derive(Debug, Clone, Copy)]
pub struct CommunitySimilarity<'a>(pub &'a CommunityStructure);

impl Similarity for CommunitySimilarity<'_> {
    fn similarity(&self, u: NodeId, v: NodeId) -> f64 {
        1.0 - (-self.0.dot(u, v)).exp()
    }

    fn node_count(&self) -> usize {
        self.0.node_count()
    }
}

/// Logistic `1 / (1 + exp(−e_u · e_v))` over node embeddings.
#[derive(Debug, Clone, Copy)]
pub struct EmbeddingSimilarity<'a>(pub &'a EmbeddingTable);

impl Similarity for EmbeddingSimilarity<'_> {
    fn similarity(&self, u: NodeId, v: NodeId) -> f64 {
        let x = self.0.dot(u, v);
        if x >= 0.0 {
            1.0 / (1.0 + (-x).exp())
        } else {
            let e = x.exp();
            e / (1.0 + e)
        }
    }

    fn node_count(&self) -> usize {
        self.0.node_count()
    }
}

/// Explicit similarity matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "{} entries for a {n}×{n} similarity matrix",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!("similarity {v} is outside [0, 1]")));
        }
        Ok(Self { n, values })
    }

    /// Tabulates any similarity function.
    pub fn from_fn<S: Similarity + ?Sized>(sim: &S) -> Self {
        let n = sim.node_count();
        let values = (0..n * n).map(|i| sim.similarity(i / n, i % n)).collect();
        Self { n, values }
    }
}

impl Similarity for SimilarityMatrix {
    fn similarity(&self, u: NodeId, v: NodeId) -> f64 {
        self.values[u * self.n + v]
    }

    fn node_count(&self) -> usize {
        self.n
    }
}

/// Checked `sim(u, v)`.
pub fn similarity<S: Similarity + ?Sized>(sim: &S, u: NodeId, v: NodeId) -> Result<f64> {
    for x in [u, v] {
        if x >= sim.node_count() {
            return Err(Error::UnknownNode(x.to_string()));
        }
    }
    Ok(sim.similarity(u, v))
}

/// `Σ_{u≠v∈S} sim(u, v)` over ordered pairs.
pub fn pair_sum<S: Similarity + ?Sized>(sim: &S, set: &[NodeId]) -> f64 {
    let mut total = 0.0;
    for (i, &u) in set.iter().enumerate() {
        for &v in &set[i + 1..] {
            total += sim.similarity(u, v) + sim.similarity(v, u);
        }
    }
    total
}

/// Change in [`pair_sum`] when `x` joins `set`: `Σ_{u∈S} sim(u, x) + sim(x, u)`.
pub fn pair_sum_increment<S: Similarity + ?Sized>(sim: &S, set: &[NodeId], x: NodeId) -> f64 {
    set.iter()
        .map(|&u| sim.similarity(u, x) + sim.similarity(x, u))
        .sum()
}

fn check_set<S: Similarity + ?Sized>(sim: &S, set: &[NodeId]) -> Result<()> {
    if let Some(&u) = set.iter().find(|&&u| u >= sim.node_count()) {
        return Err(Error::UnknownNode(u.to_string()));
    }
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("seed set contains duplicates".into()));
    }
    Ok(())
}

/// Average pairwise dissimilarity `d(S)`; needs `|S| ≥ 2`.
pub fn diversity<S: Similarity + ?Sized>(sim: &S, set: &[NodeId]) -> Result<f64> {
    check_set(sim, set)?;
    let n = set.len();
    if n < 2 {
        return Err(Error::TooFewSeeds(n));
    }
    let pairs = (n * (n - 1)) as f64;
    Ok((pairs - pair_sum(sim, set)) / pairs)
}

/// `d̃(S) = 1 − pair_sum(S) / (k(k−1))` for `|S| ≤ k`. Equals `d(S)` when
/// `|S| = k`, and 1 for sets with fewer than two nodes.
pub fn diversity_tilde<S: Similarity + ?Sized>(sim: &S, set: &[NodeId], budget: usize) -> Result<f64> {
    check_set(sim, set)?;
    if budget < 2 {
        return Err(Error::InvalidArgument(format!(
            "d̃ needs a budget of at least 2, got {budget}"
        )));
    }
    if set.len() > budget {
        return Err(Error::OverBudget {
            size: set.len(),
            budget,
        });
    }
    Ok(tilde_from_pair_sum(pair_sum(sim, set), budget))
}

pub(crate) fn tilde_from_pair_sum(pair_sum: f64, budget: usize) -> f64 {
    1.0 - pair_sum / (budget * (budget - 1)) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    const E: f64 = std::f64::consts::E;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn adim_examples_on_path_spreads() {
        let sigma = [1.0, 0.75];
        let pc = AdimUtility::new(AdimFamily::Complements, vec![1.0, 1.0]).unwrap();
        assert!(close(pc.value(&sigma), 0.75));
        assert_eq!(pc.value(&[2.0, 0.0]), 0.0);

        let cd = AdimUtility::new(AdimFamily::CobbDouglas, vec![1.0, 1.0]).unwrap();
        assert!(close(cd.value(&sigma), 0.75f64.sqrt()));
        assert!((cd.value(&sigma) - 0.866025).abs() < 1e-6);
        assert_eq!(cd.value(&[3.0, 0.0]), 0.0);

        let ces = AdimUtility::new(AdimFamily::Ces { rho: 0.5 }, vec![0.5, 0.5]).unwrap();
        let expected = (0.5f64.sqrt() + 0.375f64.sqrt()).powi(2);
        assert!(close(ces.value(&sigma), expected));
        assert!((ces.value(&sigma) - 1.741025).abs() < 1e-6);
    }

    #[test]
    fn ces_with_unit_rho_is_weighted_sum() {
        let u = AdimUtility::substitutes(vec![0.3, 2.0, 1.5]).unwrap();
        let s = [1.25, 0.5, 7.0];
        assert_eq!(u.value(&s), 0.3 * 1.25 + 2.0 * 0.5 + 1.5 * 7.0);
    }

    #[test]
    fn adim_validation() {
        assert!(AdimUtility::new(AdimFamily::Ces { rho: 0.0 }, vec![1.0]).is_err());
        assert!(AdimUtility::new(AdimFamily::Ces { rho: 1.5 }, vec![1.0]).is_err());
        assert!(AdimUtility::new(AdimFamily::Complements, vec![1.0, 0.0]).is_err());
        assert!(AdimUtility::new(AdimFamily::Complements, vec![]).is_err());
    }

    #[test]
    fn sdim_examples() {
        let gs = SdimUtility::new(SdimFamily::Substitutes, 5.0, 2).unwrap();
        assert!(close(gs.value(1.75, 1.0), 6.75));
        let gc = SdimUtility::new(SdimFamily::Complements, 5.0, 2).unwrap();
        assert_eq!(gc.value(0.0, 0.4), 0.0);
        let gd = SdimUtility::new(SdimFamily::CobbDouglas { a: 0.5, b: 0.5 }, 5.0, 2).unwrap();
        assert!(close(gd.value(4.0, 0.25), 1.0));
        assert!(SdimUtility::new(SdimFamily::CobbDouglas { a: 0.5, b: 0.6 }, 1.0, 2).is_err());
        assert!(SdimUtility::new(SdimFamily::Substitutes, 0.0, 2).is_err());
        assert!(SdimUtility::new(SdimFamily::Substitutes, 1.0, 1).is_err());
    }

    #[test]
    fn community_similarity_constants() {
        let cs = CommunityStructure::disjoint(2, &[Some(0), Some(0), Some(1)]).unwrap();
        let sim = CommunitySimilarity(&cs);
        assert!(close(similarity(&sim, 0, 1).unwrap(), 1.0 - 1.0 / E));
        assert!((similarity(&sim, 0, 1).unwrap() - 0.632121).abs() < 1e-6);
        assert_eq!(similarity(&sim, 0, 2).unwrap(), 0.0);
        assert!(similarity(&sim, 0, 3).is_err());
    }

    #[test]
    fn embedding_similarity_of_zero_vectors_is_half() {
        let emb = EmbeddingTable::new(&[vec![0.0, 0.0], vec![0.0, 0.0], vec![30.0, -40.0]]).unwrap();
        let sim = EmbeddingSimilarity(&emb);
        assert_eq!(sim.similarity(0, 1), 0.5);
        assert_eq!(sim.similarity(1, 0), 0.5);
        let far = sim.similarity(2, 2);
        assert!(far > 0.999 && far <= 1.0);
    }

    #[test]
    fn diversity_examples() {
        let cs = CommunityStructure::disjoint(2, &[Some(0), Some(0), Some(1)]).unwrap();
        let sim = CommunitySimilarity(&cs);
        assert!(close(diversity(&sim, &[0, 1]).unwrap(), 1.0 / E));
        assert!(close(diversity(&sim, &[0, 2]).unwrap(), 1.0));
        assert!(matches!(diversity(&sim, &[0]), Err(Error::TooFewSeeds(1))));

        assert_eq!(diversity_tilde(&sim, &[], 2).unwrap(), 1.0);
        assert!(close(diversity_tilde(&sim, &[0, 1], 2).unwrap(), 1.0 / E));
        assert_eq!(diversity_tilde(&sim, &[0], 3).unwrap(), 1.0);
        assert!(matches!(
            diversity_tilde(&sim, &[0, 1, 2], 2),
            Err(Error::OverBudget { .. })
        ));
        assert!(diversity_tilde(&sim, &[0, 0], 2).is_err());
    }

    #[test]
    fn incremental_pair_sum_matches_recomputation() {
        let emb = EmbeddingTable::new(&[
            vec![0.1, 0.9],
            vec![-0.4, 0.2],
            vec![1.3, -0.7],
            vec![0.0, 0.5],
        ])
        .unwrap();
        let sim = EmbeddingSimilarity(&emb);
        let base = [0, 2, 3];
        let inc = pair_sum_increment(&sim, &base, 1);
        assert!(close(pair_sum(&sim, &base) + inc, pair_sum(&sim, &[0, 2, 3, 1])));
    }
}
