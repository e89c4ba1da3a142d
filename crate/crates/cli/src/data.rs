//! Loading the inputs named by a [`RunConfig`].

use std::path::Path;

use divim_core::graph::{
    load_attributes, load_communities, load_embeddings, load_network, AttributeTable,
    CommunityStructure, EdgeListFormat, EmbeddingTable, Network,
};
use divim_core::utility::{CommunitySimilarity, EmbeddingSimilarity, Similarity};
use divim_core::NodeId;

use crate::config::{RunConfig, SimilarityKind};
use crate::CliError;

pub struct Inputs {
    pub network: Network,
    pub communities: CommunityStructure,
    pub embeddings: Option<EmbeddingTable>,
    pub attributes: Option<AttributeTable>,
}

impl Inputs {
    pub fn load(cfg: &RunConfig) -> Result<Self, CliError> {
        let path = cfg.network.as_ref().expect("validated");
        let network = load_network(path, EdgeListFormat { directed: !cfg.undirected })?;
        let communities = match &cfg.communities {
            Some(p) => {
                let count = match cfg.community_count {
                    Some(c) => c,
                    None => infer_community_count(p)?,
                };
                load_communities(p, count, network.ids())?
            }
            None => CommunityStructure::whole(network.node_count()),
        };
        let embeddings = cfg
            .embeddings
            .as_ref()
            .map(|p| load_embeddings(p, network.ids()))
            .transpose()?;
        let attributes = cfg
            .attributes
            .as_ref()
            .map(|p| load_attributes(p, network.ids()))
            .transpose()?;
        Ok(Self {
            network,
            communities,
            embeddings,
            attributes,
        })
    }

    pub fn similarity(&self, kind: SimilarityKind) -> Result<Box<dyn Similarity + '_>, CliError> {
        Ok(match kind {
            SimilarityKind::Community => Box::new(CommunitySimilarity(&self.communities)),
            SimilarityKind::Embedding => {
                let table = self.embeddings.as_ref().ok_or_else(|| {
                    CliError::Config("embeddings: embedding similarity needs an embedding file".into())
                })?;
                Box::new(EmbeddingSimilarity(table))
            }
        })
    }

    pub fn labels(&self, nodes: &[NodeId]) -> Vec<String> {
        nodes.iter().map(|&u| self.network.label(u).to_owned()).collect()
    }

    /// Reads whitespace-separated node ids; `#` starts a comment.
    pub fn load_seeds(&self, path: &Path) -> Result<Vec<NodeId>, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| divim_core::Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut seeds = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for token in line.split_whitespace() {
                let u = self.network.resolve(token)?;
                if seeds.contains(&u) {
                    return Err(CliError::Config(format!(
                        "seeds: node `{token}` is listed twice in {}",
                        path.display()
                    )));
                }
                seeds.push(u);
            }
        }
        Ok(seeds)
    }
}

/// Highest disjoint index plus one, or the width of overlapping rows.
fn infer_community_count(path: &Path) -> Result<usize, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| divim_core::Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut count = 0;
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some((_, weights)) = line.split_once(':') {
            count = count.max(weights.split_whitespace().count());
        } else if let Some(idx) = line.split_whitespace().nth(1).and_then(|t| t.parse::<usize>().ok()) {
            count = count.max(idx + 1);
        }
    }
    if count == 0 {
        return Err(CliError::Config(format!(
            "community_count: cannot infer from {}",
            path.display()
        )));
    }
    Ok(count)
}
