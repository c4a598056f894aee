//! Acceptance suite: one test per release criterion, each printing a
//! single PASS/FAIL line. Run with
//!
//! ```text
//! cargo test -p stencil-tune-cli --test acceptance -- --nocapture
//! ```
//!
//! Tests serialize on a global lock so the wall-clock criterion is not
//! perturbed by concurrent model-mode churn.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};
use std::time::Instant;
use stencil_tune_core::candidates;
use stencil_tune_core::counters;
use stencil_tune_core::exec::{ExecMode, Executor};
use stencil_tune_core::model::CostModelParams;
use stencil_tune_core::stencil::{BlockSize, Grid3D, ProblemSize, SourceTerm};
use stencil_tune_core::topology::Topology;
use stencil_tune_core::tuner::{self, quality_pct, Strategy};

fn suite_lock() -> std::sync::MutexGuard<'static, ()> {
    static LOCK: OnceLock<Mutex<()>> = OnceLock::new();
    LOCK.get_or_init(|| Mutex::new(()))
        .lock()
        .unwrap_or_else(|poisoned| poisoned.into_inner())
}

struct Criterion {
    id: &'static str,
    summary: &'static str,
}

impl Criterion {
    fn pass(self) {
        println!("[{}] {} ... PASS", self.id, self.summary);
    }

    fn skip(self, reason: &str) {
        println!("[{}] {} ... SKIP ({reason})", self.id, self.summary);
    }

    fn check(&self, ok: bool, detail: &str) {
        if !ok {
            println!("[{}] {} ... FAIL: {detail}", self.id, self.summary);
            panic!("[{}] {detail}", self.id);
        }
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

#[test]
fn criterion_1_tiled_traversal_is_exact() {
    let _guard = suite_lock();
    let c = Criterion {
        id: "AC1",
        summary: "200 randomized grids: tiled == untiled bitwise, < 60 s",
    };
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for case in 0..200 {
        let size = ProblemSize::new(
            rng.gen_range(1..=24),
            rng.gen_range(1..=24),
            rng.gen_range(1..=24),
        )
        .unwrap();
        let block = BlockSize::new(
            rng.gen_range(1..=size.i),
            rng.gen_range(1..=size.j),
            rng.gen_range(1..=size.k),
        )
        .unwrap();
        let iters = rng.gen_range(1..=5);
        let source = rng
            .gen_bool(0.5)
            .then(|| SourceTerm::centered(&size));

        let mut untiled = Grid3D::new(size, 0.05, 1.0).unwrap();
        for i in 0..size.i {
            for j in 0..size.j {
                for k in 0..size.k {
                    untiled.set(i, j, k, rng.gen_range(-1.0..1.0));
                }
            }
        }
        let mut tiled = untiled.clone();
        for step in 0..iters {
            untiled.step_untiled(source.as_ref(), step);
            tiled.step_tiled(block, source.as_ref(), step).unwrap();
        }
        let same = untiled
            .current()
            .iter()
            .zip(tiled.current())
            .all(|(a, b)| a.to_bits() == b.to_bits());
        c.check(
            same,
            &format!("case {case}: size {size} block {block} diverged"),
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    c.check(elapsed < 60.0, &format!("took {elapsed:.1} s"));
    c.pass();
}

#[test]
fn criterion_2_candidate_generation_matches_the_reference_lists() {
    let _guard = suite_lock();
    let c = Criterion {
        id: "AC2",
        summary: "candidate lists and nC counts match the reference",
    };
    let size = ProblemSize::new(200, 200, 800).unwrap();
    let set = candidates::generate(size, (5, 5, 5)).unwrap();
    c.check(
        set.per_dim_values[0] == vec![1, 51, 101, 151, 200],
        &format!("i-values {:?}", set.per_dim_values[0]),
    );
    c.check(
        set.per_dim_values[1] == vec![1, 51, 101, 151, 200],
        &format!("j-values {:?}", set.per_dim_values[1]),
    );
    c.check(
        set.per_dim_values[2] == vec![1, 201, 401, 601, 800],
        &format!("k-values {:?}", set.per_dim_values[2]),
    );
    c.check(set.len() == 125, &format!("nC = {}", set.len()));

    for (parts, expect) in [(5, 125), (10, 1000), (20, 8000)] {
        for size in [
            ProblemSize::new(200, 200, 800).unwrap(),
            ProblemSize::new(300, 300, 800).unwrap(),
            ProblemSize::new(250, 250, 1500).unwrap(),
        ] {
            let n = candidates::generate_uniform(size, parts).unwrap().len();
            c.check(
                n == expect,
                &format!("P = {parts} on {size}: nC = {n}, expected {expect}"),
            );
        }
    }
    c.pass();
}

#[test]
fn criterion_3_quality_metric_reproduces_the_reference_percentages() {
    let _guard = suite_lock();
    let c = Criterion {
        id: "AC3",
        summary: "quality metric matches the four reference pairs to 0.1",
    };
    for (min_time, actual, expect) in [
        (14.67, 33.27, 126.8),
        (12.65, 16.20, 28.1),
        (13.60, 13.57, -0.2),
        (12.91, 15.90, 23.2),
    ] {
        let got = quality_pct(min_time, actual);
        c.check(
            (got - expect).abs() < 0.1,
            &format!("({min_time}, {actual}): {got:.3} vs {expect}"),
        );
    }
    c.pass();
}

#[test]
fn criterion_4_counter_ratios_and_deltas_match_the_reference_dumps() {
    let _guard = suite_lock();
    let c = Criterion {
        id: "AC4",
        summary: "counter ratios and percentage deltas match the dumps",
    };
    let single = counters::read_csv_file(&fixture("counters_single_core.csv")).unwrap();
    c.check(single.len() == 3, "single-core dump rows");

    // Row order: No-Blocksize, Wrong-Blocksize, Efficient-Blocksize.
    let expect = [(0.016, 0.23), (0.010, 0.31), (0.005, 0.19)];
    for (record, (miss, bus)) in single.iter().zip(expect) {
        let derived = counters::derive(record).unwrap();
        c.check(
            (derived.l2_miss_rate - miss).abs() < 0.0005,
            &format!("{}: miss rate {:.4}", record.label, derived.l2_miss_rate),
        );
        c.check(
            (derived.bus_utilisation - bus).abs() < 0.005,
            &format!("{}: bus {:.4}", record.label, derived.bus_utilisation),
        );
    }

    let deltas = counters::compare(&single, "Efficient-Blocksize").unwrap();
    let misses = |label: &str| {
        deltas
            .iter()
            .find(|d| d.label == label)
            .unwrap()
            .l2_misses_pct
    };
    c.check(
        (misses("Wrong-Blocksize") - 228.5).abs() < 0.5,
        &format!("wrong misses {:+.1}%", misses("Wrong-Blocksize")),
    );
    c.check(
        (misses("No-Blocksize") - 2614.2).abs() < 0.5,
        &format!("no misses {:+.1}%", misses("No-Blocksize")),
    );

    let eight = counters::read_csv_file(&fixture("counters_eight_core.csv")).unwrap();
    let deltas = counters::compare(&eight, "Efficient-Blocksize").unwrap();
    let clocks = |label: &str| {
        deltas
            .iter()
            .find(|d| d.label == label)
            .unwrap()
            .clockticks_pct
    };
    c.check(
        (clocks("Wrong-Blocksize") - 63.8).abs() < 0.5,
        &format!("wrong clockticks {:+.1}%", clocks("Wrong-Blocksize")),
    );
    c.check(
        (clocks("No-Blocksize") - 215.3).abs() < 0.5,
        &format!("no clockticks {:+.1}%", clocks("No-Blocksize")),
    );
    c.pass();
}

#[test]
fn criterion_5_lockstep_strategies_have_zero_quality_gap() {
    let _guard = suite_lock();
    let c = Criterion {
        id: "AC5",
        summary: "50 random topologies: three-stage MinTime == ActualTime, < 30 s",
    };
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for round in 0..50 {
        let nodes = rng.gen_range(1..=4);
        let cores = rng.gen_range(1..=8);
        let cache = rng.gen_range(32 * 1024..16 * 1024 * 1024);
        let extent = rng.gen_range(6..=40);
        let parts = rng.gen_range(2..=5);
        let size = ProblemSize::new(extent, extent, extent).unwrap();
        let set = candidates::generate_uniform(size, parts).unwrap();
        let exec = Executor::new(
            Topology::new(nodes, cores)
                .unwrap()
                .with_shared_cache_bytes(cache),
            size,
            rng.gen_range(1..=5),
            ExecMode::Model(CostModelParams::default().with_cache_bytes(cache)),
        )
        .unwrap();
        for strategy in [Strategy::Mmmb, Strategy::Mwmb, Strategy::Mamb] {
            let result = tuner::tune(&exec, &set.combinations, strategy).unwrap();
            c.check(
                result.min_time == result.actual_time && result.quality_pct == 0.0,
                &format!(
                    "round {round} {strategy} on {nodes}x{cores}: min {} vs actual {}",
                    result.min_time, result.actual_time
                ),
            );
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    c.check(elapsed < 30.0, &format!("took {elapsed:.1} s"));
    c.pass();
}

#[test]
fn criterion_6_staggered_schedule_exposes_the_ob_defect() {
    let _guard = suite_lock();
    let c = Criterion {
        id: "AC6",
        summary: "fixed staggered fixture: OB quality >= +10%, MWMB == 0%",
    };
    let cache = 8 * 1024 * 1024;
    let exec = Executor::new(
        Topology::new(1, 2).unwrap().with_shared_cache_bytes(cache),
        ProblemSize::new(64, 64, 64).unwrap(),
        2,
        ExecMode::Model(CostModelParams::default().with_cache_bytes(cache)),
    )
    .unwrap();
    let fixture = vec![
        BlockSize::new(64, 64, 64).unwrap(),
        BlockSize::new(1, 1, 64).unwrap(),
        BlockSize::new(64, 64, 8).unwrap(),
        BlockSize::new(64, 64, 4).unwrap(),
    ];
    let ob = tuner::tune(&exec, &fixture, Strategy::Ob).unwrap();
    let mwmb = tuner::tune(&exec, &fixture, Strategy::Mwmb).unwrap();
    c.check(
        ob.quality_pct >= 10.0,
        &format!("OB quality {:+.1}%", ob.quality_pct),
    );
    c.check(
        mwmb.quality_pct == 0.0,
        &format!("MWMB quality {:+.1}%", mwmb.quality_pct),
    );
    c.pass();
}

#[test]
fn criterion_7_mwmb_sits_within_five_percent_of_the_exhaustive_best() {
    let _guard = suite_lock();
    let c = Criterion {
        id: "AC7",
        summary: "regression fixture: MWMB verify time within 5% of lattice best",
    };
    let params = CostModelParams::default();
    let size = ProblemSize::new(64, 64, 64).unwrap();
    let exec = Executor::new(
        Topology::new(1, 8)
            .unwrap()
            .with_shared_cache_bytes(params.cache_bytes),
        size,
        5,
        ExecMode::Model(params),
    )
    .unwrap();
    let lattice = candidates::generate_uniform(size, 5).unwrap();
    c.check(lattice.len() == 125, &format!("lattice size {}", lattice.len()));

    let tuned = tuner::tune(&exec, &lattice.combinations, Strategy::Mwmb).unwrap();
    let ranking = tuner::exhaustive_search(&exec, &lattice.combinations).unwrap();
    let best = ranking[0].actual_time;
    c.check(
        tuned.actual_time <= 1.05 * best,
        &format!("verify {} vs best {best}", tuned.actual_time),
    );
    c.pass();
}

#[test]
fn criterion_8_real_mode_tuned_block_beats_the_untiled_run() {
    let _guard = suite_lock();
    let c = Criterion {
        id: "AC8",
        summary: "real mode, 8 workers: tuned block >= 1.2x faster than untiled",
    };
    let host_cores = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    if host_cores < 4 {
        c.skip(&format!("host has {host_cores} cores, needs >= 4"));
        return;
    }

    let size = ProblemSize::new(64, 64, 256).unwrap();
    let exec = Executor::new(
        Topology::new(1, 8).unwrap(),
        size,
        3,
        ExecMode::Real,
    )
    .unwrap();
    // Small candidate slate: full grid plus cache-sized tiles.
    let slate: Vec<BlockSize> = [
        (64, 64, 256),
        (32, 32, 256),
        (16, 16, 256),
        (8, 8, 256),
        (4, 4, 256),
        (64, 8, 256),
        (8, 64, 256),
        (64, 64, 64),
        (16, 16, 64),
    ]
    .iter()
    .map(|&(i, j, k)| BlockSize::new(i, j, k).unwrap())
    .collect();

    let tuned = tuner::tune(&exec, &slate, Strategy::Mwmb).unwrap();
    let untiled = BlockSize::full(&size);

    // Median of three verification runs each, interleaved.
    let mut tuned_times = Vec::new();
    let mut untiled_times = Vec::new();
    for _ in 0..3 {
        untiled_times.push(tuner::verify(&exec, untiled).unwrap().actual_time);
        tuned_times.push(tuner::verify(&exec, tuned.b_best).unwrap().actual_time);
    }
    let median = |xs: &mut Vec<f64>| {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs[xs.len() / 2]
    };
    let t_untiled = median(&mut untiled_times);
    let t_tuned = median(&mut tuned_times);
    let speedup = t_untiled / t_tuned;
    c.check(
        speedup >= 1.2,
        &format!(
            "tuned {best} at {t_tuned:.3} s vs untiled {t_untiled:.3} s: {speedup:.2}x",
            best = tuned.b_best
        ),
    );
    c.pass();
}

#[test]
fn criterion_9_model_mode_reports_are_byte_identical_modulo_timestamps() {
    let _guard = suite_lock();
    let c = Criterion {
        id: "AC9",
        summary: "same seed reruns produce byte-identical JSON reports",
    };
    let dir = tempfile::tempdir().unwrap();
    let commands: &[(&str, Vec<&str>)] = &[
        (
            "tune",
            vec![
                "tune", "--size", "48x48x48", "--parts", "4", "--nodes", "2",
                "--cores-per-node", "2", "--strategy", "ob", "--seed", "31",
                "--mode", "model",
            ],
        ),
        (
            "exhaustive",
            vec![
                "exhaustive", "--size", "32x32x32", "--strides", "8x8x16",
                "--offset", "7", "--cores-per-node", "2", "--mode", "model",
            ],
        ),
        (
            "compare",
            vec![
                "compare", "--size", "32x32x32", "--parts", "3",
                "--cores-per-node", "2", "--reps", "3", "--seed", "5",
                "--mode", "model",
            ],
        ),
        (
            "counters",
            vec!["counters", "FIXTURE", "--baseline", "Efficient-Blocksize"],
        ),
    ];
    let fixture_path = fixture("counters_single_core.csv");
    for (name, args) in commands {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{name}-{run}.json"));
            let mut full: Vec<String> = args
                .iter()
                .map(|a| {
                    if *a == "FIXTURE" {
                        fixture_path.to_str().unwrap().to_string()
                    } else {
                        a.to_string()
                    }
                })
                .collect();
            full.push("--out".into());
            full.push(out.to_str().unwrap().into());
            let status = std::process::Command::new(env!("CARGO_BIN_EXE_stencil-tune"))
                .args(&full)
                .stdout(std::process::Stdio::null())
                .status()
                .unwrap();
            c.check(status.success(), &format!("{name} run {run} failed"));
            let text = std::fs::read_to_string(&out).unwrap();
            let stripped: String = text
                .lines()
                .filter(|line| !line.contains("\"created_at\""))
                .collect::<Vec<_>>()
                .join("\n");
            c.check(
                stripped.len() + 60 > text.len(),
                &format!("{name}: more than the timestamp line was stripped"),
            );
            outputs.push(stripped);
        }
        c.check(
            outputs[0] == outputs[1],
            &format!("{name}: reports differ beyond created_at"),
        );
    }
    c.pass();
}
