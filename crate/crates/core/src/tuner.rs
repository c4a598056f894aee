//! Two-phase blocksize selection: a selection phase that times candidates
//! across the topology, then a verification phase that re-runs the winner
//! on every worker at once.
//!
//! Four selection strategies are provided:
//!
//! * `OB` — candidates are dealt round-robin over all workers, which then
//!   run asynchronously. The globally fastest sample wins. Because
//!   co-located workers hold different blocks during the search, the
//!   winning time was measured under a cache division that verification
//!   does not reproduce.
//! * `MMMB` / `MWMB` / `MAMB` — candidates are split over nodes; all cores
//!   of a node sweep the node's list in lockstep, so the shared cache is
//!   divided equally while each candidate is timed. Stage 1 keeps each
//!   core's fastest block, stage 2 reduces a node's core choices with
//!   min / max / closest-to-average respectively, stage 3 takes the
//!   fastest node choice.
//!
//! The gap between the winner's selection-phase time (`MinTime`) and its
//! verification time (`ActualTime`) is the quality metric: near zero means
//! the selection conditions reflected the verification conditions.

use crate::error::Error;
use crate::exec::{Executor, RoundResult};
use crate::stencil::BlockSize;
use crate::topology::TimingSample;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Blocksize selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Round-robin asynchronous search, global minimum sample.
    Ob,
    /// Three stages, node reduction by minimum core time.
    Mmmb,
    /// Three stages, node reduction by worst (maximum) core time.
    Mwmb,
    /// Three stages, node reduction by closest-to-average core time.
    Mamb,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Ob, Strategy::Mmmb, Strategy::Mwmb, Strategy::Mamb];

    /// Stage-2 reduction for the three-stage strategies, `None` for OB.
    pub fn node_mode(&self) -> Option<NodeMode> {
        match self {
            Strategy::Ob => None,
            Strategy::Mmmb => Some(NodeMode::Min),
            Strategy::Mwmb => Some(NodeMode::Max),
            Strategy::Mamb => Some(NodeMode::Avg),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Strategy::Ob => "ob",
            Strategy::Mmmb => "mmmb",
            Strategy::Mwmb => "mwmb",
            Strategy::Mamb => "mamb",
        };
        f.write_str(name)
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ob" => Ok(Strategy::Ob),
            "mmmb" => Ok(Strategy::Mmmb),
            "mwmb" => Ok(Strategy::Mwmb),
            "mamb" => Ok(Strategy::Mamb),
            other => Err(format!(
                "unknown strategy `{other}` (expected ob, mmmb, mwmb or mamb)"
            )),
        }
    }
}

/// Stage-2 reduction rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeMode {
    Min,
    Max,
    Avg,
}

/// Stage-1 result: one core's fastest block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoreChoice {
    pub node_id: usize,
    pub core_id: usize,
    pub block: BlockSize,
    pub time: f64,
    /// Evaluation slot of the winning sample, for tie-breaking.
    pub slot: usize,
}

/// Stage-2 result: one node's chosen block under a reduction rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeChoice {
    pub node_id: usize,
    pub block: BlockSize,
    pub associated_time: f64,
    pub mode: NodeMode,
}

/// Stage-1 and stage-2 records of a three-stage run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageLog {
    pub core_choices: Vec<CoreChoice>,
    pub node_choices: Vec<NodeChoice>,
}

/// Complete outcome of one tuning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub strategy: Strategy,
    pub b_best: BlockSize,
    /// Winning selection-phase time.
    pub min_time: f64,
    /// Verification-phase time of `b_best` (max across workers).
    pub actual_time: f64,
    /// `100 * (actual - min) / min`.
    pub quality_pct: f64,
    /// Full selection-phase log.
    pub samples: Vec<TimingSample>,
    /// Verification-phase log.
    pub verification_samples: Vec<TimingSample>,
    /// Stage records; empty core/node lists for OB.
    pub per_stage: StageLog,
    /// Whether real-mode workers were all pinned; `None` in model mode.
    pub affinity_applied: Option<bool>,
}

/// Signed percentage gap between selection and verification times.
pub fn quality_pct(min_time: f64, actual_time: f64) -> f64 {
    100.0 * (actual_time - min_time) / min_time
}

/// Outcome of the OB selection phase.
#[derive(Debug, Clone)]
pub struct ObSelection {
    pub b_best: BlockSize,
    pub min_time: f64,
    pub samples: Vec<TimingSample>,
    pub affinity_applied: Option<bool>,
}

/// OB selection: deal candidates round-robin over all workers (worker `w`
/// gets candidates `w, w + nP, ...`), run without lockstep, return the
/// globally fastest sample. Ties go to the earliest evaluation, ordered by
/// slot, then node, then core.
pub fn select_ob(exec: &Executor, candidates: &[BlockSize]) -> Result<ObSelection, Error> {
    let workers = exec.topology().n_workers();
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    if candidates.len() < workers {
        return Err(Error::TooFewCandidates {
            candidates: candidates.len(),
            workers,
        });
    }
    let mut assignments = vec![Vec::new(); workers];
    for (index, &block) in candidates.iter().enumerate() {
        assignments[index % workers].push(block);
    }
    let round = exec.execute_round(&assignments, false)?;
    let best = round
        .samples
        .iter()
        .min_by(|a, b| {
            (a.elapsed, a.slot, a.node_id, a.core_id)
                .partial_cmp(&(b.elapsed, b.slot, b.node_id, b.core_id))
                .expect("timings are never NaN")
        })
        .ok_or(Error::NoSamples)?;
    Ok(ObSelection {
        b_best: best.block,
        min_time: best.elapsed,
        samples: round.samples.clone(),
        affinity_applied: round.affinity_applied,
    })
}

/// Stage 1: per worker, the sample with minimal time; ties broken by
/// earliest evaluation order.
pub fn stage1_core_minima(samples: &[TimingSample]) -> Result<Vec<CoreChoice>, Error> {
    if samples.is_empty() {
        return Err(Error::NoSamples);
    }
    let mut ordered: Vec<&TimingSample> = samples.iter().collect();
    ordered.sort_by(|a, b| {
        (a.node_id, a.core_id, a.slot)
            .cmp(&(b.node_id, b.core_id, b.slot))
    });
    let mut choices: Vec<CoreChoice> = Vec::new();
    for sample in ordered {
        match choices.last_mut() {
            Some(last) if last.node_id == sample.node_id && last.core_id == sample.core_id => {
                if sample.elapsed < last.time {
                    last.block = sample.block;
                    last.time = sample.elapsed;
                    last.slot = sample.slot;
                }
            }
            _ => choices.push(CoreChoice {
                node_id: sample.node_id,
                core_id: sample.core_id,
                block: sample.block,
                time: sample.elapsed,
                slot: sample.slot,
            }),
        }
    }
    Ok(choices)
}

/// Stage 2: reduce one node's core choices to a single block.
///
/// `Min` keeps the fastest, `Max` the slowest, `Avg` the one closest to
/// the node's mean core time. Ties resolve to the smallest time, then the
/// earliest core.
pub fn stage2_node_choice(choices: &[CoreChoice], mode: NodeMode) -> Result<NodeChoice, Error> {
    if choices.is_empty() {
        return Err(Error::NoSamples);
    }
    let node_id = choices[0].node_id;
    let mean = choices.iter().map(|c| c.time).sum::<f64>() / choices.len() as f64;
    let key = |c: &CoreChoice| -> (f64, f64, usize) {
        let primary = match mode {
            NodeMode::Min => c.time,
            NodeMode::Max => -c.time,
            NodeMode::Avg => (c.time - mean).abs(),
        };
        (primary, c.time, c.core_id)
    };
    let chosen = choices
        .iter()
        .min_by(|a, b| key(a).partial_cmp(&key(b)).expect("timings are never NaN"))
        .expect("non-empty");
    Ok(NodeChoice {
        node_id,
        block: chosen.block,
        associated_time: chosen.time,
        mode,
    })
}

/// Stage 3: the node choice with the smallest associated time; ties go to
/// the lowest node id.
pub fn stage3_global(node_choices: &[NodeChoice]) -> Result<(BlockSize, f64), Error> {
    let best = node_choices
        .iter()
        .min_by(|a, b| {
            (a.associated_time, a.node_id)
                .partial_cmp(&(b.associated_time, b.node_id))
                .expect("timings are never NaN")
        })
        .ok_or(Error::NoSamples)?;
    Ok((best.block, best.associated_time))
}

/// Verification outcome: every worker runs the winner concurrently.
#[derive(Debug, Clone)]
pub struct Verification {
    /// Maximum elapsed time across workers.
    pub actual_time: f64,
    pub samples: Vec<TimingSample>,
    pub affinity_applied: Option<bool>,
}

/// Verification phase: all workers run `n_iters` iterations with `block`
/// at the same time; the reported time is the slowest worker's.
pub fn verify(exec: &Executor, block: BlockSize) -> Result<Verification, Error> {
    let assignments = vec![vec![block]; exec.topology().n_workers()];
    let round: RoundResult = exec.execute_round(&assignments, true)?;
    let actual_time = round
        .samples
        .iter()
        .map(|s| s.elapsed)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Verification {
        actual_time,
        samples: round.samples,
        affinity_applied: round.affinity_applied,
    })
}

/// Run the selection phase of `strategy` followed by verification.
///
/// Three-stage strategies split the candidates contiguously into
/// `ceil(nC / N)`-sized per-node lists (the last node may get fewer) and
/// every core of a node sweeps its node's full list in lockstep.
pub fn tune(
    exec: &Executor,
    candidates: &[BlockSize],
    strategy: Strategy,
) -> Result<TuneResult, Error> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let (b_best, min_time, samples, per_stage, selection_affinity) = match strategy.node_mode() {
        None => {
            let ob = select_ob(exec, candidates)?;
            (
                ob.b_best,
                ob.min_time,
                ob.samples,
                StageLog::default(),
                ob.affinity_applied,
            )
        }
        Some(mode) => {
            let topology = exec.topology();
            let nodes = topology.nodes();
            let per_node = candidates.len().div_ceil(nodes);
            let mut assignments = Vec::with_capacity(topology.n_workers());
            for node in 0..nodes {
                let lo = (node * per_node).min(candidates.len());
                let hi = (lo + per_node).min(candidates.len());
                for _ in 0..topology.cores_per_node() {
                    assignments.push(candidates[lo..hi].to_vec());
                }
            }
            let round = exec.execute_round(&assignments, true)?;
            let core_choices = stage1_core_minima(&round.samples)?;
            let mut node_choices = Vec::with_capacity(nodes);
            for node in 0..nodes {
                let of_node: Vec<CoreChoice> = core_choices
                    .iter()
                    .filter(|c| c.node_id == node)
                    .copied()
                    .collect();
                if !of_node.is_empty() {
                    node_choices.push(stage2_node_choice(&of_node, mode)?);
                }
            }
            let (b_best, min_time) = stage3_global(&node_choices)?;
            (
                b_best,
                min_time,
                round.samples,
                StageLog {
                    core_choices,
                    node_choices,
                },
                round.affinity_applied,
            )
        }
    };

    let verification = verify(exec, b_best)?;
    let affinity_applied = match (selection_affinity, verification.affinity_applied) {
        (Some(a), Some(b)) => Some(a && b),
        (a, b) => a.or(b),
    };
    Ok(TuneResult {
        strategy,
        b_best,
        min_time,
        actual_time: verification.actual_time,
        quality_pct: quality_pct(min_time, verification.actual_time),
        samples,
        verification_samples: verification.samples,
        per_stage,
        affinity_applied,
    })
}

/// One row of the exhaustive-search ranking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedBlock {
    pub block: BlockSize,
    pub actual_time: f64,
}

/// Brute-force oracle: verification-style run for every lattice block,
/// ranked ascending by time (stable in lattice order for equal times).
pub fn exhaustive_search(
    exec: &Executor,
    lattice: &[BlockSize],
) -> Result<Vec<RankedBlock>, Error> {
    if lattice.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let mut ranking = Vec::with_capacity(lattice.len());
    for &block in lattice {
        let verification = verify(exec, block)?;
        ranking.push(RankedBlock {
            block,
            actual_time: verification.actual_time,
        });
    }
    ranking.sort_by(|a, b| {
        a.actual_time
            .partial_cmp(&b.actual_time)
            .expect("timings are never NaN")
    });
    Ok(ranking)
}
