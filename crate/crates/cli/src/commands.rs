//! Implementations of the four subcommands.
//!
//! Each command resolves its defaults into a [`RunConfig`], executes, prints
//! a summary to stdout and optionally persists a JSON report. Commands with
//! a natural table (`exhaustive`, `compare`, `counters`) also export it as
//! CSV next to the report.

use crate::report::{
    CommandResult, CompareRow, ConfigEcho, CountersConfig, EnvironmentNotes, LabeledMetrics,
    RunConfig, RunMode, RunReport,
};
use anyhow::{bail, Context, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use stencil_tune_core::affinity;
use stencil_tune_core::candidates;
use stencil_tune_core::counters;
use stencil_tune_core::exec::{ExecMode, Executor};
use stencil_tune_core::model::CostModelParams;
use stencil_tune_core::stencil::{BlockSize, ProblemSize};
use stencil_tune_core::topology::Topology;
use stencil_tune_core::tuner::{self, Strategy, TuneResult};

/// Flags shared by every kernel-driving command.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub size: ProblemSize,
    pub nodes: usize,
    pub cores_per_node: usize,
    pub cache_bytes: u64,
    pub iters: Option<usize>,
    pub mode: RunMode,
    pub seed: u64,
    pub cost: CostModelParams,
    pub out: Option<PathBuf>,
}

pub struct TuneSpec {
    pub kernel: KernelSpec,
    pub parts: [usize; 3],
    pub blocks: Option<Vec<BlockSize>>,
    pub strategy: Strategy,
}

pub struct ExhaustiveSpec {
    pub kernel: KernelSpec,
    pub strides: [usize; 3],
    pub offset: usize,
}

pub struct CompareSpec {
    pub kernel: KernelSpec,
    pub parts: [usize; 3],
    pub blocks: Option<Vec<BlockSize>>,
    pub strategies: Vec<Strategy>,
    pub reps: usize,
}

pub struct CountersSpec {
    pub input: PathBuf,
    pub baseline: Option<String>,
    pub out: Option<PathBuf>,
}

/// Default iteration counts: 5 in model mode, 20 in real mode.
pub fn resolve_iters(mode: RunMode, flag: Option<usize>) -> usize {
    flag.unwrap_or(match mode {
        RunMode::Model => 5,
        RunMode::Real => 20,
    })
}

impl KernelSpec {
    fn to_config(&self) -> RunConfig {
        let iters = resolve_iters(self.mode, self.iters);
        RunConfig {
            size: self.size,
            parts: None,
            blocks: None,
            strides: None,
            offset: None,
            nodes: self.nodes,
            cores_per_node: self.cores_per_node,
            cache_bytes: self.cache_bytes,
            iters,
            strategy: None,
            strategies: None,
            mode: self.mode,
            cost_model: self.cost.with_cache_bytes(self.cache_bytes),
            seed: self.seed,
            reps: None,
        }
    }
}

fn executor_for(config: &RunConfig) -> Result<Executor> {
    let topology = Topology::new(config.nodes, config.cores_per_node)?
        .with_shared_cache_bytes(config.cache_bytes);
    let mode = match config.mode {
        RunMode::Real => ExecMode::Real,
        RunMode::Model => ExecMode::Model(config.cost_model),
    };
    Ok(Executor::new(topology, config.size, config.iters, mode)?)
}

/// Candidate list in generation order: explicit blocks when given,
/// otherwise the parts-based grid.
fn candidate_list(config: &RunConfig) -> Result<Vec<BlockSize>> {
    if let Some(blocks) = &config.blocks {
        if blocks.is_empty() {
            bail!("explicit candidate list is empty");
        }
        for block in blocks {
            block.validate_for(&config.size)?;
        }
        return Ok(blocks.clone());
    }
    let parts = config
        .parts
        .context("either parts or an explicit block list is required")?;
    let set = candidates::generate(config.size, (parts[0], parts[1], parts[2]))?;
    Ok(set.combinations)
}

/// OB evaluates candidates "in any order"; the order used is a seeded
/// shuffle so runs are reproducible. The three-stage strategies keep
/// generation order.
fn evaluation_order(config: &RunConfig, strategy: Strategy) -> Result<Vec<BlockSize>> {
    let mut list = candidate_list(config)?;
    if strategy == Strategy::Ob {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        list.shuffle(&mut rng);
    }
    Ok(list)
}

/// Run one tuning pass exactly as described by a (possibly reloaded)
/// configuration.
pub fn tune_from_config(config: &RunConfig) -> Result<TuneResult> {
    let strategy = config.strategy.context("config carries no strategy")?;
    let order = evaluation_order(config, strategy)?;
    let exec = executor_for(config)?;
    Ok(tuner::tune(&exec, &order, strategy)?)
}

fn environment_notes(mode: RunMode, affinity_applied: Option<bool>) -> EnvironmentNotes {
    EnvironmentNotes {
        mode,
        affinity_applied,
        pinning_disabled_by_env: affinity::pinning_disabled_by_env(),
    }
}

fn persist(report: &RunReport, out: Option<&Path>) -> Result<()> {
    if let Some(path) = out {
        report.save(path)?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

fn csv_sibling(path: &Path) -> Option<PathBuf> {
    let mut sibling = path.to_path_buf();
    sibling.set_extension("csv");
    (sibling != path).then_some(sibling)
}

fn write_csv(out: Option<&Path>, header: &str, rows: &[String]) -> Result<()> {
    let Some(path) = out.and_then(csv_sibling) else {
        return Ok(());
    };
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    std::fs::write(&path, text)?;
    println!("table written to {}", path.display());
    Ok(())
}

fn seconds(t: f64) -> String {
    format!("{t:.4e} s")
}

/// Four significant figures, the precision ratios are reported at.
pub fn sig4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (3 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn cmd_tune(spec: TuneSpec) -> Result<RunReport> {
    let mut config = spec.kernel.to_config();
    config.parts = spec.blocks.is_none().then_some(spec.parts);
    config.blocks = spec.blocks;
    config.strategy = Some(spec.strategy);

    let result = tune_from_config(&config)?;
    let environment = environment_notes(config.mode, result.affinity_applied);
    let report = RunReport::new(
        "tune",
        ConfigEcho::Run(Box::new(config)),
        environment,
        CommandResult::Tune(Box::new(result)),
    );
    persist(&report, spec.kernel.out.as_deref())?;

    let CommandResult::Tune(result) = &report.result else {
        unreachable!()
    };
    println!("strategy     {}", result.strategy);
    println!("b_best       {}", result.b_best);
    println!("MinTime      {}", seconds(result.min_time));
    println!("ActualTime   {}", seconds(result.actual_time));
    println!("quality_pct  {:+.1}%", result.quality_pct);
    Ok(report)
}

pub fn cmd_exhaustive(spec: ExhaustiveSpec) -> Result<RunReport> {
    let mut config = spec.kernel.to_config();
    config.strides = Some(spec.strides);
    config.offset = Some(spec.offset);

    let lattice = candidates::exhaustive_grid(
        config.size,
        (spec.strides[0], spec.strides[1], spec.strides[2]),
        spec.offset,
    )?;
    let exec = executor_for(&config)?;
    let ranking = tuner::exhaustive_search(&exec, &lattice.combinations)?;

    let rows: Vec<String> = ranking
        .iter()
        .enumerate()
        .map(|(rank, e)| format!("{},{},{:e}", rank + 1, e.block, e.actual_time))
        .collect();
    write_csv(spec.kernel.out.as_deref(), "rank,block,actual_time_seconds", &rows)?;

    let environment = environment_notes(config.mode, None);
    let report = RunReport::new(
        "exhaustive",
        ConfigEcho::Run(Box::new(config)),
        environment,
        CommandResult::Exhaustive { ranking },
    );
    persist(&report, spec.kernel.out.as_deref())?;

    let CommandResult::Exhaustive { ranking } = &report.result else {
        unreachable!()
    };
    println!("lattice of {} blocks, top 10:", ranking.len());
    println!("{:<6} {:<14} ActualTime", "rank", "block");
    for (rank, entry) in ranking.iter().take(10).enumerate() {
        println!(
            "{:<6} {:<14} {}",
            rank + 1,
            entry.block.to_string(),
            seconds(entry.actual_time)
        );
    }
    Ok(report)
}

pub fn cmd_compare(spec: CompareSpec) -> Result<RunReport> {
    if spec.reps == 0 {
        bail!("{}", stencil_tune_core::Error::ZeroRepetitions);
    }
    if spec.strategies.is_empty() {
        bail!("no strategies to compare");
    }
    let mut config = spec.kernel.to_config();
    config.parts = spec.blocks.is_none().then_some(spec.parts);
    config.blocks = spec.blocks;
    config.strategies = Some(spec.strategies.clone());
    config.reps = Some(spec.reps);

    let mut rows = Vec::with_capacity(spec.strategies.len());
    let mut affinity_applied: Option<bool> = None;
    for &strategy in &spec.strategies {
        let mut actual_times = Vec::with_capacity(spec.reps);
        let mut seeds = Vec::with_capacity(spec.reps);
        let mut chosen_blocks = Vec::with_capacity(spec.reps);
        for rep in 0..spec.reps {
            let mut rep_config = config.clone();
            rep_config.seed = config.seed + rep as u64;
            rep_config.strategy = Some(strategy);
            let result = tune_from_config(&rep_config)?;
            affinity_applied = match (affinity_applied, result.affinity_applied) {
                (Some(a), Some(b)) => Some(a && b),
                (a, b) => a.or(b),
            };
            actual_times.push(result.actual_time);
            seeds.push(rep_config.seed);
            chosen_blocks.push(result.b_best);
        }
        let best = actual_times.iter().copied().fold(f64::INFINITY, f64::min);
        let worst = actual_times
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let average = actual_times.iter().sum::<f64>() / actual_times.len() as f64;
        let variance = actual_times
            .iter()
            .map(|t| (t - average) * (t - average))
            .sum::<f64>()
            / actual_times.len() as f64;
        rows.push(CompareRow {
            strategy,
            best,
            average,
            worst,
            stddev: variance.sqrt(),
            actual_times,
            seeds,
            chosen_blocks,
        });
    }

    let csv_rows: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{},{:e},{:e},{:e},{:e}",
                r.strategy, r.best, r.average, r.worst, r.stddev
            )
        })
        .collect();
    write_csv(
        spec.kernel.out.as_deref(),
        "strategy,best,average,worst,stddev",
        &csv_rows,
    )?;

    let environment = environment_notes(config.mode, affinity_applied);
    let report = RunReport::new(
        "compare",
        ConfigEcho::Run(Box::new(config)),
        environment,
        CommandResult::Compare { rows },
    );
    persist(&report, spec.kernel.out.as_deref())?;

    let CommandResult::Compare { rows } = &report.result else {
        unreachable!()
    };
    println!(
        "{:<8} {:>12} {:>12} {:>12} {:>12}",
        "strategy", "best", "average", "worst", "stddev"
    );
    for row in rows {
        println!(
            "{:<8} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            row.strategy.to_string(),
            row.best,
            row.average,
            row.worst,
            row.stddev
        );
    }
    Ok(report)
}

pub fn cmd_counters(spec: CountersSpec) -> Result<RunReport> {
    let records = counters::read_csv_file(&spec.input)?;
    let derived: Vec<LabeledMetrics> = records
        .iter()
        .map(|r| {
            Ok(LabeledMetrics {
                label: r.label.clone(),
                metrics: counters::derive(r)?,
            })
        })
        .collect::<Result<_>>()?;

    let comparison = spec
        .baseline
        .as_ref()
        .map(|label| counters::compare(&records, label))
        .transpose()?;

    let mut csv_rows: Vec<String> = Vec::new();
    for row in &derived {
        let deltas = comparison
            .as_ref()
            .and_then(|c| c.iter().find(|d| d.label == row.label));
        csv_rows.push(format!(
            "{},{:e},{:e},{:e},{}",
            row.label,
            row.metrics.l2_miss_rate,
            row.metrics.bus_utilisation,
            row.metrics.stall_ratio,
            deltas
                .map(|d| format!("{:.1}", d.clockticks_pct))
                .unwrap_or_default()
        ));
    }
    write_csv(
        spec.out.as_deref(),
        "label,l2_miss_rate,bus_utilisation,stall_ratio,clockticks_delta_pct",
        &csv_rows,
    )?;

    let report = RunReport::new(
        "counters",
        ConfigEcho::Counters(CountersConfig {
            input: spec.input.display().to_string(),
            baseline: spec.baseline.clone(),
        }),
        EnvironmentNotes {
            mode: RunMode::Model,
            affinity_applied: None,
            pinning_disabled_by_env: affinity::pinning_disabled_by_env(),
        },
        CommandResult::Counters {
            derived,
            comparison,
        },
    );
    persist(&report, spec.out.as_deref())?;

    let CommandResult::Counters {
        derived,
        comparison,
    } = &report.result
    else {
        unreachable!()
    };
    println!(
        "{:<24} {:>14} {:>16} {:>12}",
        "label", "l2_miss_rate", "bus_utilisation", "stall_ratio"
    );
    for row in derived {
        println!(
            "{:<24} {:>14} {:>16} {:>12}",
            row.label,
            sig4(row.metrics.l2_miss_rate),
            sig4(row.metrics.bus_utilisation),
            sig4(row.metrics.stall_ratio)
        );
    }
    if let (Some(deltas), Some(label)) = (comparison, &spec.baseline) {
        println!();
        println!("percent deltas vs `{label}`:");
        println!(
            "{:<24} {:>12} {:>12} {:>12} {:>12} {:>14}",
            "label", "clockticks", "l2_lines_in", "l2_misses", "stalls", "bus_tx"
        );
        for d in deltas {
            println!(
                "{:<24} {:>+12.1} {:>+12.1} {:>+12.1} {:>+12.1} {:>+14.1}",
                d.label,
                d.clockticks_pct,
                d.l2_lines_in_pct,
                d.l2_misses_pct,
                d.stall_cycles_pct,
                d.bus_transactions_pct
            );
        }
    }
    Ok(report)
}
