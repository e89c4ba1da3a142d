//! Diversity-aware influence maximization.
//!
//! Two problem families are covered:
//!
//! - **Audience diversification**: choose `k` seeds so that the expected
//!   activations inside each of `C` target communities, `σ_1 … σ_C`, combine
//!   well under a utility (CES, perfect complements, Cobb-Douglas).
//! - **Seed diversification**: choose `k` seeds balancing global spread `σ`
//!   against the average pairwise dissimilarity of the seeds themselves.
//!
//! The crate is organised bottom-up:
//!
//! | module       | contents                                                   |
//! |--------------|------------------------------------------------------------|
//! | [`graph`]    | networks, community memberships, embeddings, attributes    |
//! | [`cascade`]  | IC / LT simulation and Monte-Carlo spread estimation        |
//! | [`oracle`]   | exact spreads by live-edge enumeration, exhaustive optima   |
//! | [`utility`]  | utility families, similarities, seed diversity             |
//! | [`objective`]| set-function evaluators built from the above               |
//! | [`optimize`] | greedy, sandwich (upper) greedy, random greedy             |
//! | [`metrics`]  | entropy, spread in target communities, attribute coverage  |

pub mod cascade;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod objective;
pub mod optimize;
pub mod oracle;
pub mod utility;

pub use error::{Error, Result};

/// Dense node index, `0..node_count`.
pub type NodeId = usize;
