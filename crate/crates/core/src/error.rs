use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid edge {edge:?} over {n} nodes: {reason}")]
    InvalidEdge {
        edge: Vec<usize>,
        n: usize,
        reason: &'static str,
    },

    #[error("permutation is not a single cycle supported exactly on edge {edge:?}")]
    NotCyclicOnEdge { edge: Vec<usize> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Subgroup closure (or a group average) would exceed the element budget.
    #[error("group too large: order exceeds cap of {cap} elements")]
    GroupTooLarge { cap: usize },

    #[error("{what} needs {n} qubits but the cap is {cap}")]
    DimensionCap {
        what: &'static str,
        n: usize,
        cap: usize,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Every eigenvalue sits at 1, so there is no decay rate to report.
    #[error("degenerate spectrum: every eigenvalue equals 1")]
    DegenerateSpectrum,

    #[error("series value at t={t} is not positive ({value})")]
    NonPositiveSeries { t: usize, value: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
