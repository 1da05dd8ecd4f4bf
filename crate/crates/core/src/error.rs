use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node {0}")]
    UnknownNode(String),

    #[error("edge {from} -> {to} has non-positive multiplicity {count}")]
    NonPositiveMultiplicity {
        from: String,
        to: String,
        count: i64,
    },

    #[error("node {node} is assigned to both group {first} and group {second}")]
    ConflictingGroup {
        node: String,
        first: String,
        second: String,
    },

    #[error("unsupported path length {0}; expected 1, 2 or 3")]
    UnsupportedPathLength(usize),

    #[error("path count overflow at length {0}")]
    PathCountOverflow(usize),

    #[error("no paths: assortativity is undefined on an empty path set")]
    NoPaths,

    #[error("degenerate mixing: sum of a_r * b_r is {0}, assortativity is undefined")]
    DegenerateMixing(f64),

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("model and graph do not share the same node/group space")]
    MismatchedSpace,

    #[error("model kind {found} not accepted here; expected {expected}")]
    WrongModelKind {
        expected: &'static str,
        found: &'static str,
    },

    #[error("solver did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("Poisson mean must be finite and non-negative, got {0}")]
    InvalidMean(f64),

    #[error("moment arguments out of range: shared mean {shared} exceeds total mean {total}")]
    InvalidMomentArguments { shared: f64, total: f64 },

    #[error(
        "exact variance refused for {nodes} nodes (limit {limit}); use the monte_carlo method"
    )]
    CostGuard { nodes: usize, limit: usize },

    #[error("all {0} replicates produced an undefined assortativity")]
    AllReplicatesDegenerate(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid model document: {0}")]
    ModelDocument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Numerical failures (non-convergence, cost guards, undefined statistics) as
    /// opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::CostGuard { .. }
                | Error::AllReplicatesDegenerate(_)
                | Error::DegenerateMixing(_)
                | Error::NoPaths
                | Error::PathCountOverflow(_)
        )
    }
}
