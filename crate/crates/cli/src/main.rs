//! `stencil-tune`: find efficient cache-blocking tile sizes for a 3D
//! stencil kernel on multicore machines.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use stencil_tune_cli::commands::{
    self, CompareSpec, CountersSpec, ExhaustiveSpec, KernelSpec, TuneSpec,
};
use stencil_tune_cli::report::RunMode;
use stencil_tune_core::model::CostModelParams;
use stencil_tune_core::stencil::{BlockSize, ProblemSize};
use stencil_tune_core::tuner::Strategy;

#[derive(Parser)]
#[command(
    name = "stencil-tune",
    version,
    about = "Blocksize auto-tuning for cache-blocked 3D stencil kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the two-phase selection/verification tuner with one strategy.
    Tune(TuneArgs),
    /// Rank a strided blocksize lattice by exhaustive verification runs.
    Exhaustive(ExhaustiveArgs),
    /// Run several strategies repeatedly and compare their statistics.
    Compare(CompareArgs),
    /// Derive efficiency ratios from a hardware-counter CSV dump.
    Counters(CountersArgs),
}

/// A triple like `5x5x5`, or a single value applied to all dimensions.
fn parse_uniform_triple(s: &str) -> Result<[usize; 3], String> {
    if let Ok(uniform) = s.trim().parse::<usize>() {
        return Ok([uniform; 3]);
    }
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() != 3 {
        return Err(format!("expected N or IxJxK, got `{s}`"));
    }
    let mut out = [0usize; 3];
    for (slot, text) in out.iter_mut().zip(&parts) {
        *slot = text
            .trim()
            .parse()
            .map_err(|_| format!("`{text}` is not a positive integer"))?;
    }
    Ok(out)
}

#[derive(Args, Debug)]
struct ExecArgs {
    /// Per-process problem size as IxJxK, e.g. 200x200x800.
    #[arg(long)]
    size: ProblemSize,

    /// Number of simulated nodes.
    #[arg(long, default_value_t = 1)]
    nodes: usize,

    /// Worker cores per node.
    #[arg(long, default_value_t = 1)]
    cores_per_node: usize,

    /// Shared cache capacity per node, in bytes.
    #[arg(long, default_value_t = 4 * 1024 * 1024)]
    cache_bytes: u64,

    /// Kernel iterations per candidate (default: 5 in model mode, 20 in
    /// real mode).
    #[arg(long)]
    iters: Option<usize>,

    /// Timing source: wall clock or the deterministic cost model.
    #[arg(long, value_enum, default_value_t = RunMode::Model)]
    mode: RunMode,

    /// Seed for the randomized OB evaluation order.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Write the JSON run report to this path.
    #[arg(long)]
    out: Option<PathBuf>,

    #[command(flatten)]
    cost: CostArgs,
}

#[derive(Args, Debug)]
struct CostArgs {
    /// Model: cost of one point update, seconds.
    #[arg(long, default_value_t = CostModelParams::default().per_point_cost)]
    per_point_cost: f64,

    /// Model: non-unit-stride penalty weight (applied as 1 + w / b_k).
    #[arg(long, default_value_t = CostModelParams::default().stride_penalty)]
    stride_penalty: f64,

    /// Model: fixed cost per tile visited, seconds.
    #[arg(long, default_value_t = CostModelParams::default().block_overhead)]
    block_overhead: f64,

    /// Model: exponent of the over-capacity contention power law.
    #[arg(long, default_value_t = CostModelParams::default().contention_exponent)]
    alpha: f64,
}

impl ExecArgs {
    fn into_kernel_spec(self) -> KernelSpec {
        let cost = CostModelParams {
            per_point_cost: self.cost.per_point_cost,
            stride_penalty: self.cost.stride_penalty,
            block_overhead: self.cost.block_overhead,
            contention_exponent: self.cost.alpha,
            cache_bytes: self.cache_bytes,
            ..CostModelParams::default()
        };
        KernelSpec {
            size: self.size,
            nodes: self.nodes,
            cores_per_node: self.cores_per_node,
            cache_bytes: self.cache_bytes,
            iters: self.iters,
            mode: self.mode,
            seed: self.seed,
            cost,
            out: self.out,
        }
    }
}

#[derive(Args, Debug)]
struct CandidateArgs {
    /// Parts per dimension for candidate generation: `P` or `PixPjxPk`.
    #[arg(long, value_parser = parse_uniform_triple, default_value = "5", conflicts_with = "blocks")]
    parts: [usize; 3],

    /// Explicit candidate blocks as IxJxK, comma separated.
    #[arg(long, value_delimiter = ',')]
    blocks: Option<Vec<BlockSize>>,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    exec: ExecArgs,

    #[command(flatten)]
    candidates: CandidateArgs,

    /// Selection strategy.
    #[arg(long, default_value = "mwmb")]
    strategy: Strategy,
}

#[derive(Args)]
struct ExhaustiveArgs {
    #[command(flatten)]
    exec: ExecArgs,

    /// Lattice strides per dimension: `D` or `DixDjxDk`.
    #[arg(long, value_parser = parse_uniform_triple, default_value = "16x16x32")]
    strides: [usize; 3],

    /// First lattice value in each dimension.
    #[arg(long, default_value_t = 15)]
    offset: usize,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    exec: ExecArgs,

    #[command(flatten)]
    candidates: CandidateArgs,

    /// Strategies to compare, comma separated.
    #[arg(long = "strategy", value_delimiter = ',', default_value = "ob,mmmb,mwmb,mamb")]
    strategies: Vec<Strategy>,

    /// Repetitions per strategy.
    #[arg(long, default_value_t = 10)]
    reps: usize,
}

#[derive(Args)]
struct CountersArgs {
    /// CSV dump with a `label,clockticks,...` header, counts in millions.
    input: PathBuf,

    /// Label of the record the others are compared against.
    #[arg(long)]
    baseline: Option<String>,

    /// Write the JSON report to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    // Die quietly like other Unix tools when stdout is a closed pipe
    // (`stencil-tune exhaustive | head`), instead of panicking on EPIPE.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Tune(args) => commands::cmd_tune(TuneSpec {
            kernel: args.exec.into_kernel_spec(),
            parts: args.candidates.parts,
            blocks: args.candidates.blocks,
            strategy: args.strategy,
        }),
        Command::Exhaustive(args) => commands::cmd_exhaustive(ExhaustiveSpec {
            kernel: args.exec.into_kernel_spec(),
            strides: args.strides,
            offset: args.offset,
        }),
        Command::Compare(args) => commands::cmd_compare(CompareSpec {
            kernel: args.exec.into_kernel_spec(),
            parts: args.candidates.parts,
            blocks: args.candidates.blocks,
            strategies: args.strategies,
            reps: args.reps,
        }),
        Command::Counters(args) => commands::cmd_counters(CountersSpec {
            input: args.input,
            baseline: args.baseline,
            out: args.out,
        }),
    };
    match outcome {
        Ok(_) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(1)
        }
    }
}
