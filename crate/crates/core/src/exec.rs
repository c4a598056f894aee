//! Round execution: evaluate per-worker candidate lists on a topology.
//!
//! A round hands every worker an ordered list of blocks. In lockstep mode
//! all cores of a node move through their lists in step, so co-located
//! workers always hold the same block and the shared cache is divided
//! equally. Without lockstep, workers at the same list position may hold
//! different blocks, which is exactly the unequal-sharing situation the
//! three-stage strategies exist to avoid.
//!
//! Two backends share the round logic:
//! * **real** — one pinned thread per (node, core), a private [`Grid3D`]
//!   each, per-node barriers between candidates, wall-clock timing.
//! * **model** — the synthetic cost model evaluated slot by slot; the
//!   working sets co-resident at a slot are those of the same-node workers
//!   whose lists still have work there.

use crate::affinity;
use crate::error::Error;
use crate::model::{working_set_bytes_with, model_time, CostModelParams};
use crate::stencil::{
    run_iterations, BlockSize, Grid3D, ProblemSize, SourceTerm, STENCIL_RADIUS,
};
use crate::topology::{TimingSample, Topology};
use serde::{Deserialize, Serialize};
use std::sync::mpsc;
use std::sync::Barrier;

/// How candidate evaluations are timed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExecMode {
    /// Wall-clock timing of the actual kernel.
    Real,
    /// Deterministic synthetic cost.
    Model(CostModelParams),
}

impl ExecMode {
    pub fn is_real(&self) -> bool {
        matches!(self, ExecMode::Real)
    }
}

/// Samples of one round plus how faithfully it ran.
#[derive(Debug, Clone)]
pub struct RoundResult {
    /// One sample per (worker, candidate), ordered by (node, core, slot).
    pub samples: Vec<TimingSample>,
    /// Whether every real-mode worker was pinned; `None` in model mode.
    pub affinity_applied: Option<bool>,
}

/// A topology bound to a per-process problem size and an execution mode.
#[derive(Debug, Clone)]
pub struct Executor {
    topology: Topology,
    size: ProblemSize,
    n_iters: usize,
    mode: ExecMode,
}

impl Executor {
    pub fn new(
        topology: Topology,
        size: ProblemSize,
        n_iters: usize,
        mode: ExecMode,
    ) -> Result<Self, Error> {
        if n_iters == 0 {
            return Err(Error::ZeroIterations);
        }
        Ok(Self {
            topology,
            size,
            n_iters,
            mode,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn size(&self) -> ProblemSize {
        self.size
    }

    pub fn n_iters(&self) -> usize {
        self.n_iters
    }

    pub fn mode(&self) -> &ExecMode {
        &self.mode
    }

    /// Evaluate one ordered candidate list per worker.
    pub fn execute_round(
        &self,
        assignments: &[Vec<BlockSize>],
        lockstep: bool,
    ) -> Result<RoundResult, Error> {
        let workers = self.topology.n_workers();
        if assignments.len() != workers {
            return Err(Error::AssignmentShape {
                expected: workers,
                got: assignments.len(),
            });
        }
        for list in assignments {
            for block in list {
                block.validate_for(&self.size)?;
            }
        }
        if lockstep {
            for node in 0..self.topology.nodes() {
                let base = node * self.topology.cores_per_node();
                let len = assignments[base].len();
                for core in 1..self.topology.cores_per_node() {
                    if assignments[base + core].len() != len {
                        return Err(Error::LockstepLengthMismatch { node });
                    }
                }
            }
        }

        match &self.mode {
            ExecMode::Model(params) => Ok(self.model_round(assignments, params)),
            ExecMode::Real => self.real_round(assignments, lockstep),
        }
    }

    /// Slot-synchronised simulation: the blocks co-resident in a node's
    /// cache at slot `s` are the slot-`s` entries of that node's workers.
    fn model_round(&self, assignments: &[Vec<BlockSize>], params: &CostModelParams) -> RoundResult {
        let cpn = self.topology.cores_per_node();
        let mut samples = Vec::with_capacity(assignments.iter().map(Vec::len).sum());
        for (worker, list) in assignments.iter().enumerate() {
            let (node_id, core_id) = self.topology.worker_coords(worker);
            for (slot, &block) in list.iter().enumerate() {
                let mut concurrent = Vec::with_capacity(cpn);
                for core in 0..cpn {
                    let peer = &assignments[node_id * cpn + core];
                    if let Some(&resident) = peer.get(slot) {
                        concurrent.push(working_set_bytes_with(
                            resident,
                            STENCIL_RADIUS,
                            params.bytes_per_cell,
                        ));
                    }
                }
                let elapsed = model_time(block, self.size, self.n_iters, &concurrent, params);
                samples.push(TimingSample {
                    block,
                    node_id,
                    core_id,
                    slot,
                    elapsed,
                    iterations: self.n_iters,
                });
            }
        }
        RoundResult {
            samples,
            affinity_applied: None,
        }
    }

    fn real_round(
        &self,
        assignments: &[Vec<BlockSize>],
        lockstep: bool,
    ) -> Result<RoundResult, Error> {
        let cpn = self.topology.cores_per_node();
        let pin_allowed = !affinity::pinning_disabled_by_env();
        let barriers: Vec<Barrier> = (0..self.topology.nodes()).map(|_| Barrier::new(cpn)).collect();
        let (tx, rx) = mpsc::channel::<(Vec<TimingSample>, bool)>();

        std::thread::scope(|scope| {
            for (worker, list) in assignments.iter().enumerate() {
                let (node_id, core_id) = self.topology.worker_coords(worker);
                let barrier = &barriers[node_id];
                let tx = tx.clone();
                let cpu = self.topology.cpu_for_worker(worker);
                let size = self.size;
                let n_iters = self.n_iters;
                scope.spawn(move || {
                    let pinned = pin_allowed && affinity::pin_current_thread(cpu);
                    let mut grid = Grid3D::new(size, 0.001, 1.0)
                        .expect("per-worker grid allocation");
                    let source = SourceTerm::centered(&size);
                    let mut mine = Vec::with_capacity(list.len());
                    for (slot, &block) in list.iter().enumerate() {
                        if lockstep {
                            barrier.wait();
                        }
                        let elapsed =
                            run_iterations(&mut grid, block, Some(&source), n_iters)
                                .expect("blocks validated before the round");
                        mine.push(TimingSample {
                            block,
                            node_id,
                            core_id,
                            slot,
                            elapsed,
                            iterations: n_iters,
                        });
                    }
                    let _ = tx.send((mine, pinned));
                });
            }
            drop(tx);
        });

        let mut samples = Vec::new();
        let mut all_pinned = true;
        for (mine, pinned) in rx {
            samples.extend(mine);
            all_pinned &= pinned;
        }
        samples.sort_by_key(|s| (s.node_id, s.core_id, s.slot));
        Ok(RoundResult {
            samples,
            affinity_applied: Some(all_pinned && pin_allowed),
        })
    }
}
