//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by model construction, propagation, and optimization.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid transmon spec: {0}")]
    InvalidTransmonSpec(String),

    #[error("default channel map is defined for five levels; got {levels} (supply an explicit map)")]
    ChannelMapRequiresFive { levels: usize },

    #[error("invalid chain system: {0}")]
    InvalidChainSystem(String),

    #[error("even chain of length {levels} supports no end-to-end dark state")]
    EvenChain { levels: usize },

    #[error("dark state is degenerate: all sublattice amplitudes vanish")]
    DegenerateDarkState,

    #[error("even-sublattice detunings differ by {spread:.3e} rad/ns; dark state requires alignment")]
    MisalignedDetunings { spread: f64 },

    #[error("mixing angle undefined: both couplings vanish")]
    UndefinedMixingAngle,

    #[error("subspace partition boundary {boundary} out of range for {levels} levels")]
    PartitionOutOfRange { boundary: usize, levels: usize },

    #[error("invalid pulse parameters: {0}")]
    InvalidPulseParams(String),

    #[error("invalid scaling factor: {0}")]
    InvalidScaling(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("state diverged (non-finite amplitude) at node {node}")]
    Divergence { node: usize },

    #[error("invalid cost weights: {0}")]
    InvalidWeights(String),

    #[error("gradient descent diverged: objective increased for {count} consecutive iterations at the smallest step size")]
    StepSizeExhausted { count: usize },

    #[error("quadratic model matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("model decrease {0:.3e} is numerically degenerate")]
    DegenerateModel(f64),

    #[error("objective evaluation failed at the initial point")]
    ObjectiveEvaluation,

    #[error("invalid optimizer configuration: {0}")]
    InvalidOptimizerConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
