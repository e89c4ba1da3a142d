//! Networks and the per-node side data that the objectives read:
//! community memberships, embeddings and categorical attributes.
//!
//! Everything here is immutable once built, so a loaded [`Network`] can be
//! shared freely between simulation threads.

mod community;
mod io;
mod network;
mod synthetic;
mod tables;

pub use community::{CommunityStructure, MembershipMode};
pub use io::{
    load_attributes, load_communities, load_embeddings, load_network, parse_attributes,
    parse_communities, parse_embeddings, parse_network, EdgeListFormat,
};
pub use network::{Edge, IdMap, Network, NetworkBuilder, LT_WEIGHT_TOLERANCE};
pub use synthetic::{random_instance, SyntheticInstance, SyntheticSpec};
pub use tables::{AttributeTable, EmbeddingTable};
