//! Execution topology: simulated multicore nodes on one machine.

use crate::error::Error;
use crate::stencil::BlockSize;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// `nodes` simulated machines with `cores_per_node` workers each. Workers
/// of one node share a cache; nodes share nothing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    nodes: usize,
    cores_per_node: usize,
    /// Optional worker -> physical CPU mapping, injective.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pinning: Option<Vec<usize>>,
    /// Per-node shared cache capacity, echoed into the cost model.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    shared_cache_bytes: Option<u64>,
}

impl Topology {
    pub fn new(nodes: usize, cores_per_node: usize) -> Result<Self, Error> {
        if nodes == 0 || cores_per_node == 0 {
            return Err(Error::InvalidTopology);
        }
        Ok(Self {
            nodes,
            cores_per_node,
            pinning: None,
            shared_cache_bytes: None,
        })
    }

    pub fn with_shared_cache_bytes(mut self, bytes: u64) -> Self {
        self.shared_cache_bytes = Some(bytes);
        self
    }

    pub fn with_pinning(mut self, pinning: Vec<usize>) -> Result<Self, Error> {
        let workers = self.n_workers();
        let distinct: HashSet<_> = pinning.iter().collect();
        if pinning.len() != workers || distinct.len() != pinning.len() {
            return Err(Error::InvalidPinning { workers });
        }
        self.pinning = Some(pinning);
        Ok(self)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn cores_per_node(&self) -> usize {
        self.cores_per_node
    }

    /// Total worker count `nP = N * cores_per_node`.
    pub fn n_workers(&self) -> usize {
        self.nodes * self.cores_per_node
    }

    pub fn shared_cache_bytes(&self) -> Option<u64> {
        self.shared_cache_bytes
    }

    /// (node, core) of a flat worker index.
    pub fn worker_coords(&self, worker: usize) -> (usize, usize) {
        (worker / self.cores_per_node, worker % self.cores_per_node)
    }

    /// Physical CPU the worker asks to be pinned to.
    pub fn cpu_for_worker(&self, worker: usize) -> usize {
        match &self.pinning {
            Some(map) => map[worker],
            None => worker,
        }
    }

    pub fn has_explicit_pinning(&self) -> bool {
        self.pinning.is_some()
    }
}

/// Elapsed time of `iterations` kernel iterations for one block on one core.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingSample {
    pub block: BlockSize,
    pub node_id: usize,
    pub core_id: usize,
    /// Position in the worker's evaluation order.
    pub slot: usize,
    /// Seconds, strictly positive.
    pub elapsed: f64,
    pub iterations: usize,
}
