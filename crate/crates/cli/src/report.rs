//! JSON run reports.
//!
//! Every command persists a single self-contained JSON document: the tool
//! version, the fully resolved configuration (defaults included), and the
//! result. Re-running a model-mode report's configuration reproduces its
//! result exactly; `created_at` is the only field that varies between
//! identical runs.

use serde::{Deserialize, Serialize};
use std::path::Path;
use stencil_tune_core::counters::{CounterComparison, DerivedMetrics};
use stencil_tune_core::model::CostModelParams;
use stencil_tune_core::stencil::{BlockSize, ProblemSize};
use stencil_tune_core::tuner::{RankedBlock, Strategy, TuneResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Timing mode requested on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
#[clap(rename_all = "lowercase")]
pub enum RunMode {
    Real,
    Model,
}

/// Fully resolved configuration of a kernel-driving command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub size: ProblemSize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub parts: Option<[usize; 3]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub blocks: Option<Vec<BlockSize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub strides: Option<[usize; 3]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub offset: Option<usize>,
    pub nodes: usize,
    pub cores_per_node: usize,
    pub cache_bytes: u64,
    pub iters: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub strategy: Option<Strategy>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub strategies: Option<Vec<Strategy>>,
    pub mode: RunMode,
    pub cost_model: CostModelParams,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reps: Option<usize>,
}

/// Configuration of the counters command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountersConfig {
    pub input: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub baseline: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConfigEcho {
    Run(Box<RunConfig>),
    Counters(CountersConfig),
}

/// Execution-environment facts worth keeping next to the numbers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvironmentNotes {
    pub mode: RunMode,
    /// Whether every real-mode worker was pinned; `null` in model mode.
    pub affinity_applied: Option<bool>,
    pub pinning_disabled_by_env: bool,
}

/// Per-strategy statistics over repeated runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareRow {
    pub strategy: Strategy,
    pub best: f64,
    pub average: f64,
    pub worst: f64,
    pub stddev: f64,
    /// Verification times of each repetition, in repetition order.
    pub actual_times: Vec<f64>,
    /// Seed used by each repetition.
    pub seeds: Vec<u64>,
    /// Block chosen by each repetition.
    pub chosen_blocks: Vec<BlockSize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledMetrics {
    pub label: String,
    pub metrics: DerivedMetrics,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CommandResult {
    Tune(Box<TuneResult>),
    Exhaustive { ranking: Vec<RankedBlock> },
    Compare { rows: Vec<CompareRow> },
    Counters {
        derived: Vec<LabeledMetrics>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        comparison: Option<Vec<CounterComparison>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub created_at: String,
    pub command: String,
    pub config: ConfigEcho,
    pub environment: EnvironmentNotes,
    pub result: CommandResult,
}

impl RunReport {
    pub fn new(
        command: &str,
        config: ConfigEcho,
        environment: EnvironmentNotes,
        result: CommandResult,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_at: chrono::Utc::now().to_rfc3339(),
            command: command.to_string(),
            config,
            environment,
            result,
        }
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
