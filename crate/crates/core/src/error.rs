use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("node index {index} out of range for graph with {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("egonet radius insufficient for moment order k: k = {order}, radius = {radius} allows k <= {max}")]
    RadiusInsufficient { order: usize, radius: usize, max: usize },

    #[error("{what} exceeds the configured cap ({size} > {cap}); {advice}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
        advice: &'static str,
    },

    #[error("insufficient moments: order r = {order} needs {needed} values, got {got}")]
    InsufficientMoments { order: usize, needed: usize, got: usize },

    #[error("invalid moment sequence: {0}")]
    InvalidMoments(String),

    #[error("input moments infeasible: the Hankel matrix H_2r is not positive semidefinite")]
    InfeasibleMoments,

    #[error("upper bound requires node count n >= 2")]
    MissingNodeCount,

    #[error("upper bound refused: graph has negative weights, so |lambda_i| <= lambda_1 may fail (pass the override to compute anyway)")]
    NegativeWeights,

    #[error("no feasible upper bound - refine scan_steps or check moments")]
    NoFeasibleUpperBound,

    #[error("bisection bracket not found after {0} doublings")]
    BracketExhausted(usize),

    #[error("power iteration did not converge after {iters} iterations (last Rayleigh interval [{lo}, {hi}])")]
    NoConvergence { iters: usize, lo: f64, hi: f64 },

    #[error("edge and triangle moments apply to unweighted simple graphs only")]
    WeightedGraph,

    #[error("edge count must be positive (an edgeless graph has lambda_1 = 0)")]
    NoEdges,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("nothing to emit")]
    NothingToEmit,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
