//! Error type shared by all tuning components.

use crate::stencil::{BlockSize, ProblemSize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("problem size must be at least 1 in every dimension, got {0}x{1}x{2}")]
    InvalidProblemSize(usize, usize, usize),

    #[error("block size must be at least 1 in every dimension, got {0}x{1}x{2}")]
    InvalidBlockSize(usize, usize, usize),

    #[error("block {block} exceeds problem size {size} in dimension {dim}")]
    BlockExceedsSize {
        block: BlockSize,
        size: ProblemSize,
        dim: char,
    },

    #[error("time step and grid spacing must be positive, got dt={dt}, dx={dx}")]
    InvalidSteps { dt: f64, dx: f64 },

    #[error("velocity field has {got} cells, grid expects {expected}")]
    VelocityFieldShape { got: usize, expected: usize },

    #[error("source location ({0}, {1}, {2}) is outside the grid interior")]
    SourceOutsideInterior(usize, usize, usize),

    #[error("iteration count must be at least 1")]
    ZeroIterations,

    #[error("parts must be at least 2 per dimension, got {0}")]
    InvalidParts(usize),

    #[error("dimension of extent {size} is too small for {parts} parts")]
    SizeTooSmallForParts { size: usize, parts: usize },

    #[error("stride must be at least 1")]
    InvalidStride,

    #[error("lattice for dimension of extent {0} came out empty")]
    EmptyLattice(usize),

    #[error("topology must have at least one node and one core per node")]
    InvalidTopology,

    #[error("pinning map must assign a distinct CPU to each of the {workers} workers")]
    InvalidPinning { workers: usize },

    #[error("expected {expected} per-worker candidate lists, got {got}")]
    AssignmentShape { expected: usize, got: usize },

    #[error("lockstep execution requires equal-length candidate lists within node {node}")]
    LockstepLengthMismatch { node: usize },

    #[error("candidate set is empty")]
    EmptyCandidates,

    #[error("{candidates} candidates cannot be partitioned over {workers} workers: every worker needs at least one")]
    TooFewCandidates { candidates: usize, workers: usize },

    #[error("no timing samples to aggregate")]
    NoSamples,

    #[error("counter field `{field}` of record `{label}` must be positive")]
    ZeroCounterField { label: String, field: &'static str },

    #[error("stall ratio {ratio:.4} of record `{label}` exceeds the sanity bound {bound}")]
    StallRatioOutOfRange {
        label: String,
        ratio: f64,
        bound: f64,
    },

    #[error("baseline record `{0}` not found in counter input")]
    MissingBaseline(String),

    #[error("counter comparison needs at least two records")]
    TooFewRecords,

    #[error("malformed counter CSV at line {line}: {message}")]
    CounterCsv { line: u64, message: String },

    #[error("repetition count must be at least 1")]
    ZeroRepetitions,
}
