use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(
        "coherent amplitude |z|^2 = {abs2:.6e} needs cutoff >= {required} (got {cutoff}){}",
        node_suffix(*node)
    )]
    TruncationGuard { abs2: f64, cutoff: usize, required: usize, node: Option<usize> },

    #[error("wave vector must be nonzero{}", node_suffix(*node))]
    ZeroWaveVector { node: Option<usize> },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("cutoff must be at least 1 (got {0})")]
    InvalidCutoff(usize),

    #[error("ladder operator mode {mode} does not act on a {modes}-mode state")]
    ModeMismatch { mode: &'static str, modes: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not a proper rotation (orthogonality residual {residual:.3e}, det {det:.12})")]
    NotARotation { residual: f64, det: f64 },

    #[error("grid is not closed under the transformation: image of node {node} is not a grid node")]
    GridNotClosed { node: usize },

    #[error("probe has support on level {level}, allowed at most {allowed}")]
    SupportViolation { level: usize, allowed: usize },

    #[error("rho[{node}] out of [0,1] (value {value})")]
    RhoOutOfRange { node: usize, value: f64 },

    #[error("grid is not symmetric under k -> -k: node {node} has no partner")]
    AsymmetricGrid { node: usize },

    #[error("{name} must be strictly positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },

    #[error("state is not normalized (norm {0:.15})")]
    NotNormalized(f64),
}

fn node_suffix(node: Option<usize>) -> String {
    match node {
        Some(i) => format!(" at node {i}"),
        None => String::new(),
    }
}
