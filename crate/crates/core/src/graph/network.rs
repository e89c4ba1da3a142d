use std::collections::HashMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, NodeId, Result};

/// Slack allowed when checking that LT in-weights sum to at most one, so
/// that `d` copies of `1/d` are accepted.
pub const LT_WEIGHT_TOLERANCE: f64 = 1e-9;

/// A directed edge with its IC activation probability `p` and LT weight `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    pub p: f64,
    pub b: f64,
}

/// Bidirectional map between the labels used in input files and dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdMap {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl IdMap {
    /// Identity map: node `i` is labelled `"i"`.
    pub fn dense(node_count: usize) -> Self {
        let labels: Vec<String> = (0..node_count).map(|i| i.to_string()).collect();
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        Self { labels, index }
    }

    /// Returns the id of `label`, assigning the next free id on first sight.
    pub fn intern(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), id);
        id
    }

    pub fn get(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.labels[id]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Writes `id<TAB>label` lines in id order.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (id, label) in self.labels.iter().enumerate() {
            writeln!(w, "{id}\t{label}")?;
        }
        Ok(())
    }
}

/// Directed network with per-edge IC probabilities and LT weights.
///
/// Edges are kept sorted by `(source, target)`; an out-edge CSR and an
/// in-edge index are built once at construction.
#[derive(Debug, Clone)]
pub struct Network {
    node_count: usize,
    directed: bool,
    edges: Vec<Edge>,
    out_offsets: Vec<usize>,
    in_index: Vec<usize>,
    in_offsets: Vec<usize>,
    ids: IdMap,
}

impl Network {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Whether the input was directed. Undirected inputs are stored doubled.
    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// All directed edges, sorted by `(source, target)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Out-edges of `u`, sorted by target.
    pub fn out_edges(&self, u: NodeId) -> &[Edge] {
        &self.edges[self.out_offsets[u]..self.out_offsets[u + 1]]
    }

    /// Index range of `u`'s out-edges within [`Network::edges`].
    pub fn out_edge_range(&self, u: NodeId) -> std::ops::Range<usize> {
        self.out_offsets[u]..self.out_offsets[u + 1]
    }

    /// Indices into [`Network::edges`] of the in-edges of `v`, sorted by source.
    pub fn in_edge_indices(&self, v: NodeId) -> &[usize] {
        &self.in_index[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn in_edges(&self, v: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.in_edge_indices(v).iter().map(move |&e| &self.edges[e])
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_offsets[v + 1] - self.in_offsets[v]
    }

    pub fn ids(&self) -> &IdMap {
        &self.ids
    }

    pub fn label(&self, u: NodeId) -> &str {
        self.ids.label(u)
    }

    /// Looks up a node by its input label.
    pub fn resolve(&self, label: &str) -> Result<NodeId> {
        self.ids
            .get(label)
            .ok_or_else(|| Error::UnknownNode(label.to_owned()))
    }

    /// Fails with [`Error::UnknownNode`] unless every id is below `node_count`.
    pub fn check_nodes(&self, nodes: &[NodeId]) -> Result<()> {
        match nodes.iter().find(|&&u| u >= self.node_count) {
            Some(&u) => Err(Error::UnknownNode(u.to_string())),
            None => Ok(()),
        }
    }

    /// Checks the LT invariant `Σ_u b_uv ≤ 1` for every node `v`.
    pub fn check_lt_weights(&self) -> Result<()> {
        for v in 0..self.node_count {
            let sum: f64 = self.in_edges(v).map(|e| e.b).sum();
            if sum > 1.0 + LT_WEIGHT_TOLERANCE {
                return Err(Error::WeightSum {
                    node: self.label(v).to_owned(),
                    sum,
                });
            }
        }
        Ok(())
    }

    /// Writes the network as a directed edge list with a `#nodes` header and
    /// explicit `p b` columns, using dense ids. Reloading it as directed
    /// reproduces the same edges and parameters.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "#nodes {}", self.node_count)?;
        for e in &self.edges {
            writeln!(w, "{} {} {} {}", e.source, e.target, e.p, e.b)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct PendingEdge {
    source: NodeId,
    target: NodeId,
    p: Option<f64>,
    b: Option<f64>,
}

/// Collects edges and produces a validated [`Network`].
///
/// Missing `p` and `b` default to `1 / deg_in(target)`, with in-degrees
/// counted after undirected edges have been doubled.
#[derive(Debug, Clone)]
pub struct NetworkBuilder {
    node_count: usize,
    directed: bool,
    ids: Option<IdMap>,
    edges: Vec<PendingEdge>,
}

impl NetworkBuilder {
    pub fn new(node_count: usize) -> Self {
        Self {
            node_count,
            directed: true,
            ids: None,
            edges: Vec::new(),
        }
    }

    pub fn directed(mut self, directed: bool) -> Self {
        self.directed = directed;
        self
    }

    /// Labels for the nodes; defaults to [`IdMap::dense`].
    pub fn ids(mut self, ids: IdMap) -> Self {
        self.ids = Some(ids);
        self
    }

    pub fn edge(self, source: NodeId, target: NodeId) -> Self {
        self.edge_with(source, target, None, None)
    }

    pub fn edge_p(self, source: NodeId, target: NodeId, p: f64) -> Self {
        self.edge_with(source, target, Some(p), None)
    }

    pub fn edge_with(
        mut self,
        source: NodeId,
        target: NodeId,
        p: Option<f64>,
        b: Option<f64>,
    ) -> Self {
        self.push(source, target, p, b);
        self
    }

    pub fn push(&mut self, source: NodeId, target: NodeId, p: Option<f64>, b: Option<f64>) {
        self.edges.push(PendingEdge {
            source,
            target,
            p,
            b,
        });
    }

    pub fn build(self) -> Result<Network> {
        let n = self.node_count;
        if n == 0 {
            return Err(Error::InvalidArgument("a network needs at least one node".into()));
        }
        let ids = self.ids.unwrap_or_else(|| IdMap::dense(n));
        if ids.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{} labels supplied for {n} nodes",
                ids.len()
            )));
        }
        let label = |u: NodeId| ids.label(u).to_owned();

        let mut pending = Vec::with_capacity(self.edges.len() * if self.directed { 1 } else { 2 });
        for e in self.edges {
            for u in [e.source, e.target] {
                if u >= n {
                    return Err(Error::NodeOutOfRange { node: u, count: n });
                }
            }
            if e.source == e.target {
                return Err(Error::SelfLoop(label(e.source)));
            }
            if !self.directed {
                pending.push(PendingEdge {
                    source: e.target,
                    target: e.source,
                    ..e.clone()
                });
            }
            pending.push(e);
        }
        pending.sort_by_key(|e| (e.source, e.target));
        if let Some(w) = pending
            .windows(2)
            .find(|w| (w[0].source, w[0].target) == (w[1].source, w[1].target))
        {
            return Err(Error::DuplicateEdge(label(w[0].source), label(w[0].target)));
        }

        let mut in_deg = vec![0usize; n];
        for e in &pending {
            in_deg[e.target] += 1;
        }
        let mut edges = Vec::with_capacity(pending.len());
        for e in pending {
            let default = 1.0 / in_deg[e.target] as f64;
            let p = e.p.unwrap_or(default);
            let b = e.b.unwrap_or(default);
            for (name, value) in [("p", p), ("b", b)] {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::ParameterRange {
                        from: label(e.source),
                        to: label(e.target),
                        name,
                        value,
                    });
                }
            }
            edges.push(Edge {
                source: e.source,
                target: e.target,
                p,
                b,
            });
        }

        let mut out_offsets = vec![0usize; n + 1];
        for e in &edges {
            out_offsets[e.source + 1] += 1;
        }
        for u in 0..n {
            out_offsets[u + 1] += out_offsets[u];
        }
        let mut in_offsets = vec![0usize; n + 1];
        for v in 0..n {
            in_offsets[v + 1] = in_offsets[v] + in_deg[v];
        }
        // Edges are sorted by source, so filling in order keeps each in-list sorted by source.
        let mut in_index = vec![0usize; edges.len()];
        let mut cursor = in_offsets.clone();
        for (i, e) in edges.iter().enumerate() {
            in_index[cursor[e.target]] = i;
            cursor[e.target] += 1;
        }

        Ok(Network {
            node_count: n,
            directed: self.directed,
            edges,
            out_offsets,
            in_index,
            in_offsets,
            ids,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undirected_edges_are_doubled_with_default_probabilities() {
        let net = NetworkBuilder::new(3)
            .directed(false)
            .edge(0, 1)
            .edge(1, 2)
            .edge(0, 2)
            .build()
            .unwrap();
        assert_eq!(net.edge_count(), 6);
        for e in net.edges() {
            assert_eq!(e.p, 0.5);
            assert_eq!(e.b, 0.5);
        }
    }

    #[test]
    fn in_edges_are_sorted_by_source() {
        let net = NetworkBuilder::new(4)
            .edge(3, 0)
            .edge(1, 0)
            .edge(2, 0)
            .build()
            .unwrap();
        let sources: Vec<_> = net.in_edges(0).map(|e| e.source).collect();
        assert_eq!(sources, vec![1, 2, 3]);
        assert_eq!(net.in_degree(0), 3);
        assert_eq!(net.in_degree(1), 0);
    }

    #[test]
    fn rejects_invalid_edges() {
        assert!(matches!(
            NetworkBuilder::new(2).edge(1, 1).build(),
            Err(Error::SelfLoop(_))
        ));
        assert!(matches!(
            NetworkBuilder::new(2).edge(0, 2).build(),
            Err(Error::NodeOutOfRange { node: 2, count: 2 })
        ));
        assert!(matches!(
            NetworkBuilder::new(2).edge(0, 1).edge(0, 1).build(),
            Err(Error::DuplicateEdge(..))
        ));
        assert!(matches!(
            NetworkBuilder::new(2).directed(false).edge(0, 1).edge(1, 0).build(),
            Err(Error::DuplicateEdge(..))
        ));
        assert!(matches!(
            NetworkBuilder::new(2).edge_p(0, 1, 1.5).build(),
            Err(Error::ParameterRange { name: "p", .. })
        ));
        assert!(NetworkBuilder::new(0).build().is_err());
    }

    #[test]
    fn lt_weight_sum_is_checked() {
        let net = NetworkBuilder::new(3)
            .edge_with(0, 2, None, Some(0.7))
            .edge_with(1, 2, None, Some(0.6))
            .build()
            .unwrap();
        assert!(matches!(net.check_lt_weights(), Err(Error::WeightSum { .. })));

        let thirds = NetworkBuilder::new(4).edge(0, 3).edge(1, 3).edge(2, 3).build().unwrap();
        thirds.check_lt_weights().unwrap();
    }
}
