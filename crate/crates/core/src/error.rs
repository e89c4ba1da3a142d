use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}", path = .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("node id {node} out of range for {count} nodes")]
    NodeOutOfRange { node: usize, count: usize },

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("self-loop on node `{0}`")]
    SelfLoop(String),

    #[error("duplicate edge `{0}` -> `{1}`")]
    DuplicateEdge(String, String),

    #[error("edge `{from}` -> `{to}`: {name} = {value} is outside [0, 1]")]
    ParameterRange {
        from: String,
        to: String,
        name: &'static str,
        value: f64,
    },

    #[error("LT weights into node `{node}` sum to {sum}, which exceeds 1")]
    WeightSum { node: String, sum: f64 },

    #[error("community index {index} out of range for {count} communities")]
    CommunityOutOfRange { index: usize, count: usize },

    #[error("invalid community membership: {0}")]
    Membership(String),

    #[error("invalid embedding: {0}")]
    Embedding(String),

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("average pairwise diversity needs at least two seeds, got {0}")]
    TooFewSeeds(usize),

    #[error("seed set of size {size} exceeds the budget {budget}")]
    OverBudget { size: usize, budget: usize },

    #[error("budget {budget} exceeds the {universe} available nodes")]
    BudgetTooLarge { budget: usize, universe: usize },

    #[error("entropy is undefined when every community spread is zero")]
    ZeroSpread,

    #[error("enumeration bound exceeded: {0}")]
    EnumerationBound(String),
}
