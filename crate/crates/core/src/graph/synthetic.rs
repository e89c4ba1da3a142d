//! Small random instances for experiments and property checks.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{CommunityStructure, EmbeddingTable, Network, NetworkBuilder};
use crate::cascade::RngSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub nodes: usize,
    /// Disjoint communities, each non-empty.
    pub communities: usize,
    /// Probability that an ordered node pair becomes an edge.
    pub density: f64,
    pub max_edges: usize,
    /// Edge probabilities are drawn uniformly from this range.
    pub p_range: (f64, f64),
    pub embedding_dim: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            nodes: 8,
            communities: 2,
            density: 0.25,
            max_edges: 12,
            p_range: (0.1, 0.9),
            embedding_dim: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    pub network: Network,
    pub communities: CommunityStructure,
    pub embeddings: EmbeddingTable,
}

/// A directed random graph with default LT weights, a random balanced
/// community partition and uniform `[-1, 1]` embeddings.
pub fn random_instance(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticInstance> {
    if spec.communities == 0 || spec.communities > spec.nodes {
        return Err(Error::InvalidArgument(format!(
            "cannot split {} nodes into {} non-empty communities",
            spec.nodes, spec.communities
        )));
    }
    let (lo, hi) = spec.p_range;
    if !(0.0 < lo && lo <= hi && hi <= 1.0) {
        return Err(Error::InvalidArgument(format!("invalid probability range [{lo}, {hi}]")));
    }
    let mut rng = RngSpec::new(seed).stream(0);
    let n = spec.nodes;

    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    pairs.shuffle(&mut rng);
    let mut builder = NetworkBuilder::new(n);
    let mut edges = 0;
    for (u, v) in pairs {
        if edges == spec.max_edges {
            break;
        }
        if rng.random::<f64>() < spec.density {
            let p = if lo == hi { lo } else { rng.random_range(lo..hi) };
            // Two decimals keep fixtures readable when written out.
            builder.push(u, v, Some((p * 100.0).round().max(1.0) / 100.0), None);
            edges += 1;
        }
    }
    let network = builder.build()?;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut assignment = vec![None; n];
    for (i, &u) in order.iter().enumerate() {
        assignment[u] = Some(i % spec.communities);
    }
    let communities = CommunityStructure::disjoint(spec.communities, &assignment)?;

    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..spec.embedding_dim.max(1))
                .map(|_| rng.random_range(-1.0..1.0))
                .collect()
        })
        .collect();
    let embeddings = EmbeddingTable::new(&rows)?;
    Ok(SyntheticInstance {
        network,
        communities,
        embeddings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_reproducible_and_bounded() {
        let spec = SyntheticSpec::default();
        let a = random_instance(&spec, 7).unwrap();
        let b = random_instance(&spec, 7).unwrap();
        assert_eq!(a.network.edges(), b.network.edges());
        assert!(a.network.edge_count() <= spec.max_edges);
        assert!(a.communities.sizes().iter().all(|&s| s == 4));
        a.network.check_lt_weights().unwrap();
    }
}
