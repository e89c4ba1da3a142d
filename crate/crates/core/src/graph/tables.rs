use std::collections::{BTreeMap, BTreeSet};

use crate::{Error, NodeId, Result};

/// One real vector `e_u` per node, all of the same dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::Embedding("embedding dimension must be at least 1".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (u, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Embedding(format!(
                    "node {u} has dimension {}, expected {dim}",
                    row.len()
                )));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::Embedding(format!("node {u} has a non-finite entry")));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn vector(&self, u: NodeId) -> &[f64] {
        &self.data[u * self.dim..(u + 1) * self.dim]
    }

    pub fn dot(&self, u: NodeId, v: NodeId) -> f64 {
        self.vector(u)
            .iter()
            .zip(self.vector(v))
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Categorical, set-valued node attributes such as `country` or `movies`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttributeTable {
    nodes: Vec<BTreeMap<String, BTreeSet<String>>>,
}

impl AttributeTable {
    pub fn new(node_count: usize) -> Self {
        Self {
            nodes: vec![BTreeMap::new(); node_count],
        }
    }

    /// Adds `values` to `attribute` of node `u`. The value set may be empty.
    pub fn insert<I, S>(&mut self, u: NodeId, attribute: &str, values: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if attribute.is_empty() {
            return Err(Error::InvalidArgument("attribute names must be non-empty".into()));
        }
        let count = self.nodes.len();
        let slot = self
            .nodes
            .get_mut(u)
            .ok_or(Error::NodeOutOfRange { node: u, count })?;
        slot.entry(attribute.to_owned())
            .or_default()
            .extend(values.into_iter().map(Into::into));
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn values(&self, u: NodeId, attribute: &str) -> Option<&BTreeSet<String>> {
        self.nodes.get(u)?.get(attribute)
    }

    /// Whether at least one node carries `attribute`.
    pub fn has_attribute(&self, attribute: &str) -> bool {
        self.nodes.iter().any(|m| m.contains_key(attribute))
    }

    /// All attribute names, sorted.
    pub fn attribute_names(&self) -> BTreeSet<&str> {
        self.nodes
            .iter()
            .flat_map(|m| m.keys().map(String::as_str))
            .collect()
    }
}
