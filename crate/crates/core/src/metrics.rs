//! Diversity diagnostics for a chosen seed set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cascade::{estimate_spread, RngSpec, SpreadModel, SpreadVector};
use crate::graph::{AttributeTable, CommunityStructure, Network};
use crate::{Error, NodeId, Result};

/// Shares `p_c = σ_c / Σσ` of the per-community spread.
pub fn community_shares(sv: &SpreadVector) -> Result<Vec<f64>> {
    let total = sv.community_sum();
    if !(total > 0.0) {
        return Err(Error::ZeroSpread);
    }
    Ok(sv.per_community.iter().map(|s| s / total).collect())
}

/// Shannon entropy (bits) of the community shares, with `0 log 0 = 0`.
pub fn entropy(sv: &SpreadVector) -> Result<f64> {
    let h = community_shares(sv)?
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum::<f64>();
    Ok(h.max(0.0))
}

/// Expected number of activated nodes that belong to at least one community.
pub fn spread_in_targets(
    net: &Network,
    model: SpreadModel,
    seeds: &[NodeId],
    communities: &CommunityStructure,
    trials: u64,
    rng: RngSpec,
) -> Result<f64> {
    Ok(estimate_spread(net, model, seeds, communities, trials, rng)?.in_targets)
}

/// Number of distinct values of `attribute` over the seeds.
pub fn coverage(table: &AttributeTable, seeds: &[NodeId], attribute: &str) -> Result<usize> {
    if !table.has_attribute(attribute) {
        return Err(Error::UnknownAttribute(attribute.to_owned()));
    }
    let mut seen = BTreeSet::new();
    for &u in seeds {
        if u >= table.node_count() {
            return Err(Error::NodeOutOfRange {
                node: u,
                count: table.node_count(),
            });
        }
        if let Some(values) = table.values(u, attribute) {
            seen.extend(values.iter().map(String::as_str));
        }
    }
    Ok(seen.len())
}

/// Coverage of every attribute in the table.
pub fn coverage_all(table: &AttributeTable, seeds: &[NodeId]) -> Result<BTreeMap<String, usize>> {
    table
        .attribute_names()
        .into_iter()
        .map(|a| Ok((a.to_owned(), coverage(table, seeds, a)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    /// Bits; `None` when no community receives any spread.
    pub entropy: Option<f64>,
    pub spread: f64,
    pub spread_std_err: f64,
    pub spread_in_targets: f64,
    pub spread_in_targets_std_err: f64,
    pub per_community: Vec<f64>,
    pub per_community_share: Option<Vec<f64>>,
    /// Average pairwise dissimilarity of the seeds, when a similarity is known.
    pub seed_diversity: Option<f64>,
    pub coverage: BTreeMap<String, usize>,
    /// Monte-Carlo trials behind the spread figures (0 for exact values).
    pub trials: u64,
}

impl DiagnosticsReport {
    pub fn from_spread(sv: &SpreadVector) -> Self {
        Self {
            entropy: entropy(sv).ok(),
            spread: sv.global,
            spread_std_err: sv.global_std_err,
            spread_in_targets: sv.in_targets,
            spread_in_targets_std_err: sv.in_targets_std_err,
            per_community: sv.per_community.clone(),
            per_community_share: community_shares(sv).ok(),
            seed_diversity: None,
            coverage: BTreeMap::new(),
            trials: sv.trials,
        }
    }

    pub fn with_coverage(mut self, coverage: BTreeMap<String, usize>) -> Self {
        self.coverage = coverage;
        self
    }

    pub fn with_seed_diversity(mut self, d: Option<f64>) -> Self {
        self.seed_diversity = d;
        self
    }

    /// Two aligned columns, one metric per line.
    pub fn to_table(&self) -> String {
        let fmt_err = |v: f64, e: f64| {
            if self.trials > 0 {
                format!("{v:.4} ± {e:.4}")
            } else {
                format!("{v:.6}")
            }
        };
        let mut rows: Vec<(String, String)> = vec![
            (
                "entropy (bits)".into(),
                self.entropy.map_or("n/a".into(), |h| format!("{h:.4}")),
            ),
            ("spread".into(), fmt_err(self.spread, self.spread_std_err)),
            (
                "spread in targets".into(),
                fmt_err(self.spread_in_targets, self.spread_in_targets_std_err),
            ),
        ];
        for (c, s) in self.per_community.iter().enumerate() {
            let share = self
                .per_community_share
                .as_ref()
                .map_or(String::new(), |p| format!("  ({:.1}%)", 100.0 * p[c]));
            rows.push((format!("community {c}"), format!("{s:.4}{share}")));
        }
        if let Some(d) = self.seed_diversity {
            rows.push(("seed diversity".into(), format!("{d:.4}")));
        }
        for (a, n) in &self.coverage {
            rows.push((format!("coverage[{a}]"), n.to_string()));
        }
        rows.push((
            "trials".into(),
            if self.trials == 0 {
                "exact".into()
            } else {
                self.trials.to_string()
            },
        ));
        let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<width$}  {v}");
        }
        out
    }
}
