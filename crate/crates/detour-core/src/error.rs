use thiserror::Error;

/// Errors produced by any stage of the planning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("topology parse error: {0}")]
    Parse(String),

    #[error("arc ({0}, {1}) has no reverse arc ({1}, {0})")]
    Asymmetry(String, String),

    #[error("arc ({0}, {1}) has non-positive or non-finite capacity {2}")]
    BadCapacity(String, String, f64),

    #[error("duplicate arc ({0}, {1})")]
    DuplicateArc(String, String),

    #[error("self-loop on node {0}")]
    SelfLoop(String),

    #[error("unknown node {0}")]
    UnknownNode(String),

    #[error("fat-tree parameter k = {0} must be even and >= 2")]
    BadFatTreeK(usize),

    #[error("topology has {0} edge nodes, need at least 2 to build demands")]
    TooFewEdgeNodes(usize),

    #[error("demand {0} -> {1}: {2}")]
    BadDemand(String, String, String),

    #[error("no capacity-feasible path for demand {demand} ({src} -> {dst})")]
    RoutingInfeasible {
        demand: usize,
        src: String,
        dst: String,
    },

    #[error("solver backend `{0}` is not available (known backends: {1})")]
    UnknownBackend(String, String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("solution failed in-house verification: {0}")]
    Verification(String),

    #[error("plan extraction: {0}")]
    Extraction(String),

    #[error("stale or inconsistent plan artifact: {0}")]
    StaleArtifact(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
