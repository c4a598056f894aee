//! Blocksize auto-tuning for cache-blocked 3D stencil kernels.
//!
//! The toolkit finds tile (blocksize) dimensions that keep a 3D
//! finite-difference kernel's working set inside the cache shared by the
//! cores of a multicore node. It combines:
//!
//! * [`stencil`] — the wave kernel (10th order in space, 2nd in time) with
//!   a blocked traversal that is bit-identical to the plain sweep;
//! * [`candidates`] — blocksize search-space generation;
//! * [`exec`] + [`model`] — pinned worker groups that time candidates on
//!   simulated nodes, either with wall clocks or with a deterministic
//!   synthetic cost model;
//! * [`tuner`] — the two-phase selection/verification framework with the
//!   OB, MMMB, MWMB and MAMB strategies, a quality metric and an
//!   exhaustive-search oracle;
//! * [`counters`] — hardware-counter dump analysis (miss rate, bus
//!   utilisation, stall ratio).

pub mod affinity;
pub mod candidates;
pub mod counters;
pub mod error;
pub mod exec;
pub mod model;
pub mod stencil;
pub mod topology;
pub mod tuner;

pub use candidates::{exhaustive_grid, generate, generate_uniform, CandidateSet};
pub use error::Error;
pub use exec::{ExecMode, Executor, RoundResult};
pub use model::{model_time, working_set_bytes, CostModelParams, BYTES_PER_CELL};
pub use stencil::{
    run_iterations, BlockSize, Grid3D, ProblemSize, SourceTerm, Velocity, STENCIL_RADIUS,
};
pub use topology::{TimingSample, Topology};
pub use tuner::{
    exhaustive_search, quality_pct, select_ob, tune, verify, CoreChoice, NodeChoice, NodeMode,
    RankedBlock, StageLog, Strategy, TuneResult,
};
