use serde::{Deserialize, Serialize};

use crate::{Error, NodeId, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MembershipMode {
    /// Every membership vector is all-zero or one-hot.
    Disjoint,
    /// Arbitrary non-negative membership strengths.
    Overlapping,
}

/// Per-node membership vectors `F_u` over `C` communities.
///
/// A node belongs to community `c` when `F_uc > 0`. Nodes with an all-zero
/// vector belong to no target community; they still count towards global
/// spread but never towards any per-community spread.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityStructure {
    count: usize,
    mode: MembershipMode,
    weights: Vec<f64>,
    node_communities: Vec<Vec<usize>>,
    members: Vec<Vec<NodeId>>,
}

impl CommunityStructure {
    /// Disjoint structure from a per-node assignment (`None` = no community).
    pub fn disjoint(count: usize, assignment: &[Option<usize>]) -> Result<Self> {
        check_count(count)?;
        let mut weights = vec![0.0; assignment.len() * count];
        for (u, c) in assignment.iter().enumerate() {
            if let Some(c) = *c {
                if c >= count {
                    return Err(Error::CommunityOutOfRange { index: c, count });
                }
                weights[u * count + c] = 1.0;
            }
        }
        Ok(Self::from_weights(count, MembershipMode::Disjoint, weights))
    }

    /// Disjoint structure from explicit member lists; a node may appear in at most one list.
    pub fn from_members(node_count: usize, members: &[Vec<NodeId>]) -> Result<Self> {
        let mut assignment = vec![None; node_count];
        for (c, list) in members.iter().enumerate() {
            for &u in list {
                if u >= node_count {
                    return Err(Error::NodeOutOfRange {
                        node: u,
                        count: node_count,
                    });
                }
                if assignment[u].replace(c).is_some() {
                    return Err(Error::Membership(format!(
                        "node {u} listed in more than one disjoint community"
                    )));
                }
            }
        }
        Self::disjoint(members.len(), &assignment)
    }

    /// Overlapping structure from one length-`count` row per node.
    pub fn overlapping(count: usize, rows: &[Vec<f64>]) -> Result<Self> {
        check_count(count)?;
        let mut weights = Vec::with_capacity(rows.len() * count);
        for (u, row) in rows.iter().enumerate() {
            if row.len() != count {
                return Err(Error::Membership(format!(
                    "node {u} has {} membership weights, expected {count}",
                    row.len()
                )));
            }
            if let Some(w) = row.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
                return Err(Error::Membership(format!(
                    "node {u} has invalid membership weight {w}"
                )));
            }
            weights.extend_from_slice(row);
        }
        Ok(Self::from_weights(count, MembershipMode::Overlapping, weights))
    }

    /// A single community containing every node.
    pub fn whole(node_count: usize) -> Self {
        Self::from_weights(1, MembershipMode::Disjoint, vec![1.0; node_count])
    }

    fn from_weights(count: usize, mode: MembershipMode, weights: Vec<f64>) -> Self {
        let node_count = weights.len() / count;
        let mut node_communities = vec![Vec::new(); node_count];
        let mut members = vec![Vec::new(); count];
        for u in 0..node_count {
            for c in 0..count {
                if weights[u * count + c] > 0.0 {
                    node_communities[u].push(c);
                    members[c].push(u);
                }
            }
        }
        Self {
            count,
            mode,
            weights,
            node_communities,
            members,
        }
    }

    /// Number of communities `C`.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn node_count(&self) -> usize {
        self.node_communities.len()
    }

    pub fn mode(&self) -> MembershipMode {
        self.mode
    }

    /// Membership vector `F_u`.
    pub fn membership(&self, u: NodeId) -> &[f64] {
        &self.weights[u * self.count..(u + 1) * self.count]
    }

    /// Members of community `c`, ascending.
    pub fn members(&self, c: usize) -> Result<&[NodeId]> {
        self.members
            .get(c)
            .map(Vec::as_slice)
            .ok_or(Error::CommunityOutOfRange {
                index: c,
                count: self.count,
            })
    }

    /// `|V_c|` for every community.
    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    /// Communities `c` with `F_uc > 0`, ascending.
    pub fn communities_of(&self, u: NodeId) -> &[usize] {
        &self.node_communities[u]
    }

    pub fn in_any(&self, u: NodeId) -> bool {
        !self.node_communities[u].is_empty()
    }

    /// `F_u · F_v`.
    pub fn dot(&self, u: NodeId, v: NodeId) -> f64 {
        self.membership(u)
            .iter()
            .zip(self.membership(v))
            .map(|(a, b)| a * b)
            .sum()
    }
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::Membership("need at least one community".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_encoding() {
        let cs = CommunityStructure::disjoint(2, &[Some(0), Some(1), None]).unwrap();
        assert_eq!(cs.membership(0), &[1.0, 0.0]);
        assert_eq!(cs.membership(1), &[0.0, 1.0]);
        assert_eq!(cs.membership(2), &[0.0, 0.0]);
        assert_eq!(cs.members(0).unwrap(), &[0]);
        assert!(!cs.in_any(2));
        assert!(matches!(
            cs.members(2),
            Err(Error::CommunityOutOfRange { index: 2, count: 2 })
        ));
    }

    #[test]
    fn overlapping_membership_uses_positive_weights() {
        let cs = CommunityStructure::overlapping(3, &[vec![0.5, 0.5, 0.0], vec![0.0, 0.0, 2.0]])
            .unwrap();
        assert_eq!(cs.membership(0), &[0.5, 0.5, 0.0]);
        assert!(cs.members(1).unwrap().contains(&0));
        assert_eq!(cs.communities_of(0), &[0, 1]);
        assert_eq!(cs.dot(0, 1), 0.0);
        assert!(CommunityStructure::overlapping(2, &[vec![1.0]]).is_err());
        assert!(CommunityStructure::overlapping(2, &[vec![1.0, -0.1]]).is_err());
    }

    #[test]
    fn disjoint_rejects_bad_index() {
        assert!(matches!(
            CommunityStructure::disjoint(2, &[Some(2)]),
            Err(Error::CommunityOutOfRange { .. })
        ));
        assert!(CommunityStructure::from_members(3, &[vec![0, 1], vec![1]]).is_err());
    }
}
