//! Hardware-counter dump ingestion and derived efficiency ratios.
//!
//! Input is a flat CSV dump (one record per row, counts in millions of
//! events) rather than a live profiler session. Three ratios diagnose
//! blocksize quality:
//!
//! * `l2_miss_rate`      = lines into L2 / retired instructions
//! * `bus_utilisation`   = 2 * bus transactions / bus cycles
//! * `stall_ratio`       = stalled cycles / clockticks

use crate::error::Error;
use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::Path;

/// Upper bound on a plausible stall ratio; anything above it points to a
/// corrupted dump.
pub const DEFAULT_STALL_RATIO_BOUND: f64 = 2.0;

/// Raw event counts for one run, in millions of events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterRecord {
    pub label: String,
    pub clockticks: f64,
    pub retired_instructions: f64,
    pub l1_misses: f64,
    pub l2_lines_in: f64,
    pub l2_misses: f64,
    pub stall_cycles: f64,
    pub bus_cycles: f64,
    pub bus_transactions: f64,
}

/// Ratios derived from one record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedMetrics {
    pub l2_miss_rate: f64,
    pub bus_utilisation: f64,
    pub stall_ratio: f64,
}

/// Compute the three ratios, rejecting zero divisors by name.
pub fn derive(record: &CounterRecord) -> Result<DerivedMetrics, Error> {
    derive_bounded(record, DEFAULT_STALL_RATIO_BOUND)
}

pub fn derive_bounded(record: &CounterRecord, stall_bound: f64) -> Result<DerivedMetrics, Error> {
    let positive = |value: f64, field: &'static str| -> Result<f64, Error> {
        if value > 0.0 {
            Ok(value)
        } else {
            Err(Error::ZeroCounterField {
                label: record.label.clone(),
                field,
            })
        }
    };
    let metrics = DerivedMetrics {
        l2_miss_rate: record.l2_lines_in
            / positive(record.retired_instructions, "retired_instructions")?,
        bus_utilisation: 2.0 * record.bus_transactions / positive(record.bus_cycles, "bus_cycles")?,
        stall_ratio: record.stall_cycles / positive(record.clockticks, "clockticks")?,
    };
    if metrics.stall_ratio > stall_bound {
        return Err(Error::StallRatioOutOfRange {
            label: record.label.clone(),
            ratio: metrics.stall_ratio,
            bound: stall_bound,
        });
    }
    Ok(metrics)
}

/// Percentage deltas of one record against the baseline, per raw counter
/// and per derived metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterComparison {
    pub label: String,
    pub clockticks_pct: f64,
    pub retired_instructions_pct: f64,
    pub l1_misses_pct: f64,
    pub l2_lines_in_pct: f64,
    pub l2_misses_pct: f64,
    pub stall_cycles_pct: f64,
    pub bus_cycles_pct: f64,
    pub bus_transactions_pct: f64,
    pub l2_miss_rate_pct: f64,
    pub bus_utilisation_pct: f64,
    pub stall_ratio_pct: f64,
}

fn delta(value: f64, baseline: f64) -> f64 {
    100.0 * (value - baseline) / baseline
}

/// Compare every record (including the baseline itself) to the record
/// labelled `baseline_label`.
pub fn compare(
    records: &[CounterRecord],
    baseline_label: &str,
) -> Result<Vec<CounterComparison>, Error> {
    if records.len() < 2 {
        return Err(Error::TooFewRecords);
    }
    let baseline = records
        .iter()
        .find(|r| r.label == baseline_label)
        .ok_or_else(|| Error::MissingBaseline(baseline_label.to_string()))?;
    let base_metrics = derive(baseline)?;

    let positive_base = |value: f64, field: &'static str| -> Result<f64, Error> {
        if value > 0.0 {
            Ok(value)
        } else {
            Err(Error::ZeroCounterField {
                label: baseline.label.clone(),
                field,
            })
        }
    };

    records
        .iter()
        .map(|record| {
            let metrics = derive(record)?;
            Ok(CounterComparison {
                label: record.label.clone(),
                clockticks_pct: delta(
                    record.clockticks,
                    positive_base(baseline.clockticks, "clockticks")?,
                ),
                retired_instructions_pct: delta(
                    record.retired_instructions,
                    positive_base(baseline.retired_instructions, "retired_instructions")?,
                ),
                l1_misses_pct: delta(
                    record.l1_misses,
                    positive_base(baseline.l1_misses, "l1_misses")?,
                ),
                l2_lines_in_pct: delta(
                    record.l2_lines_in,
                    positive_base(baseline.l2_lines_in, "l2_lines_in")?,
                ),
                l2_misses_pct: delta(
                    record.l2_misses,
                    positive_base(baseline.l2_misses, "l2_misses")?,
                ),
                stall_cycles_pct: delta(
                    record.stall_cycles,
                    positive_base(baseline.stall_cycles, "stall_cycles")?,
                ),
                bus_cycles_pct: delta(
                    record.bus_cycles,
                    positive_base(baseline.bus_cycles, "bus_cycles")?,
                ),
                bus_transactions_pct: delta(
                    record.bus_transactions,
                    positive_base(baseline.bus_transactions, "bus_transactions")?,
                ),
                l2_miss_rate_pct: delta(metrics.l2_miss_rate, base_metrics.l2_miss_rate),
                bus_utilisation_pct: delta(metrics.bus_utilisation, base_metrics.bus_utilisation),
                stall_ratio_pct: delta(metrics.stall_ratio, base_metrics.stall_ratio),
            })
        })
        .collect()
}

/// Read records from CSV with a `label,clockticks,...` header, reporting
/// the offending line on malformed input.
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<CounterRecord>, Error> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = Vec::new();
    for result in csv_reader.deserialize::<CounterRecord>() {
        let record = result.map_err(|e| Error::CounterCsv {
            line: e
                .position()
                .map(|p| p.line())
                .unwrap_or_default(),
            message: match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
                _ => e.to_string(),
            },
        })?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::CounterCsv {
            line: 1,
            message: "no counter records found".to_string(),
        });
    }
    Ok(records)
}

pub fn read_csv_file(path: &Path) -> Result<Vec<CounterRecord>, Error> {
    let file = std::fs::File::open(path).map_err(|e| Error::CounterCsv {
        line: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    read_csv(file)
}
