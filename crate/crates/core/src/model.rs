//! Deterministic synthetic cost model.
//!
//! Model mode replaces wall-clock timing with a closed-form cost so that
//! scheduling behaviour (lockstep fairness, staggered-schedule contention)
//! can be tested reproducibly. The cost of one worker's run is
//!
//! ```text
//! nI * [ points * per_point_cost * (1 + stride_penalty / b_k)
//!        + tiles * block_overhead ]
//!   * max(1, sum(concurrent working sets) / cache_bytes) ^ alpha
//! ```
//!
//! Small `b_k` blocks break the unit-stride inner loop and are penalised;
//! once the working sets sharing a node's cache exceed its capacity, the
//! contention factor grows as a power law.

use crate::stencil::{BlockSize, ProblemSize};
use serde::{Deserialize, Serialize};

/// Bytes of one field cell (64-bit floating point).
pub const BYTES_PER_CELL: u64 = 8;

/// Parameters of the synthetic cost model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModelParams {
    /// Cost of updating one grid point, in seconds.
    pub per_point_cost: f64,
    /// Weight of the non-unit-stride penalty applied as `1 + penalty / b_k`.
    pub stride_penalty: f64,
    /// Fixed cost per tile visited, in seconds.
    pub block_overhead: f64,
    /// Exponent of the over-capacity contention power law.
    pub contention_exponent: f64,
    /// Shared cache capacity per node, in bytes.
    pub cache_bytes: u64,
    /// Bytes per field cell.
    pub bytes_per_cell: u64,
}

impl Default for CostModelParams {
    fn default() -> Self {
        Self {
            per_point_cost: 1e-9,
            stride_penalty: 40.0,
            block_overhead: 1e-7,
            contention_exponent: 1.5,
            cache_bytes: 4 * 1024 * 1024,
            bytes_per_cell: BYTES_PER_CELL,
        }
    }
}

impl CostModelParams {
    pub fn with_cache_bytes(mut self, cache_bytes: u64) -> Self {
        self.cache_bytes = cache_bytes;
        self
    }
}

/// Bytes one worker touches while sweeping a tile: the read tile with its
/// halo plus the two write/time-level tiles.
pub fn working_set_bytes(block: BlockSize, radius: usize) -> u64 {
    working_set_bytes_with(block, radius, BYTES_PER_CELL)
}

pub fn working_set_bytes_with(block: BlockSize, radius: usize, bytes_per_cell: u64) -> u64 {
    let (bi, bj, bk) = (block.i as u64, block.j as u64, block.k as u64);
    let r = 2 * radius as u64;
    let halo_tile = (bi + r) * (bj + r) * (bk + r);
    let plain_tile = bi * bj * bk;
    bytes_per_cell * (halo_tile + 2 * plain_tile)
}

/// Deterministic cost of `n_iters` kernel iterations for one worker.
///
/// `concurrent_sets` must include this worker's own working set; the sum is
/// taken over everything resident in the node's shared cache at that moment.
pub fn model_time(
    block: BlockSize,
    size: ProblemSize,
    n_iters: usize,
    concurrent_sets: &[u64],
    params: &CostModelParams,
) -> f64 {
    let points = size.points() as f64;
    let tiles = block.tile_count(&size) as f64;
    let sweep = points * params.per_point_cost * (1.0 + params.stride_penalty / block.k as f64)
        + tiles * params.block_overhead;
    let resident: u64 = concurrent_sets.iter().sum();
    let pressure = resident as f64 / params.cache_bytes as f64;
    let contention = pressure.max(1.0).powf(params.contention_exponent);
    n_iters as f64 * sweep * contention
}
