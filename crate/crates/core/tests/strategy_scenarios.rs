//! End-to-end strategy behaviour in model mode, checked against
//! brute-force re-simulations that share no code with the executor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stencil_tune_core::candidates;
use stencil_tune_core::exec::{ExecMode, Executor};
use stencil_tune_core::model::CostModelParams;
use stencil_tune_core::stencil::{BlockSize, ProblemSize};
use stencil_tune_core::topology::Topology;
use stencil_tune_core::tuner::{self, Strategy};

/// Literal re-statement of the cost formulas, kept separate from the
/// library on purpose.
fn sim_working_set(block: BlockSize) -> u64 {
    let (bi, bj, bk) = (block.i as u64, block.j as u64, block.k as u64);
    8 * ((bi + 10) * (bj + 10) * (bk + 10) + 2 * bi * bj * bk)
}

fn sim_time(
    block: BlockSize,
    size: ProblemSize,
    iters: usize,
    resident_bytes: u64,
    p: &CostModelParams,
) -> f64 {
    let points = (size.i * size.j * size.k) as f64;
    let tiles = (size.i.div_ceil(block.i) * size.j.div_ceil(block.j) * size.k.div_ceil(block.k))
        as f64;
    let sweep = points * p.per_point_cost * (1.0 + p.stride_penalty / block.k as f64)
        + tiles * p.block_overhead;
    let pressure = (resident_bytes as f64 / p.cache_bytes as f64).max(1.0);
    iters as f64 * sweep * pressure.powf(p.contention_exponent)
}

/// The staggered fixture that exposes the OB defect: a 64^3 per-process
/// grid on one two-core node with an 8 MiB shared cache.
///
/// Candidate order [full, sliver, flat8, flat4] deals `full` and `flat8`
/// to core 0 and `sliver` and `flat4` to core 1. At slot 0 the full-grid
/// block is timed next to the tiny sliver, so both fit the cache and its
/// sample is contention-free; verification runs the full block on both
/// cores, blowing the cache.
fn defect_fixture() -> (Executor, Vec<BlockSize>, CostModelParams) {
    let cache = 8 * 1024 * 1024;
    let params = CostModelParams::default().with_cache_bytes(cache);
    let exec = Executor::new(
        Topology::new(1, 2).unwrap().with_shared_cache_bytes(cache),
        ProblemSize::new(64, 64, 64).unwrap(),
        2,
        ExecMode::Model(params),
    )
    .unwrap();
    let candidates = vec![
        BlockSize::new(64, 64, 64).unwrap(),
        BlockSize::new(1, 1, 64).unwrap(),
        BlockSize::new(64, 64, 8).unwrap(),
        BlockSize::new(64, 64, 4).unwrap(),
    ];
    (exec, candidates, params)
}

#[test]
fn ob_understates_the_winner_on_the_staggered_fixture() {
    let (exec, candidates, _) = defect_fixture();
    let result = tuner::tune(&exec, &candidates, Strategy::Ob).unwrap();
    assert_eq!(result.b_best, candidates[0]);
    assert!(
        result.min_time < result.actual_time,
        "selection-phase time should undershoot verification"
    );
    assert!(result.quality_pct >= 10.0, "quality {}", result.quality_pct);
}

#[test]
fn lockstep_mwmb_is_immune_on_the_same_fixture() {
    let (exec, candidates, _) = defect_fixture();
    let result = tuner::tune(&exec, &candidates, Strategy::Mwmb).unwrap();
    assert_eq!(result.quality_pct, 0.0);
    assert_eq!(result.min_time, result.actual_time);
    // Lockstep timing also steers the choice away from the cache-blowing
    // full-grid block.
    assert_eq!(result.b_best, candidates[1]);
    let ob = tuner::tune(&exec, &candidates, Strategy::Ob).unwrap();
    assert!(result.actual_time < ob.actual_time);
}

#[test]
fn ob_samples_match_a_brute_force_schedule_simulation() {
    let (exec, candidates, params) = defect_fixture();
    let selection = tuner::select_ob(&exec, &candidates).unwrap();

    // Re-deal the round-robin schedule by hand.
    let workers = 2usize;
    let mut lists: Vec<Vec<BlockSize>> = vec![Vec::new(); workers];
    for (index, &block) in candidates.iter().enumerate() {
        lists[index % workers].push(block);
    }
    // Walk the schedule slot by slot; co-residents at a slot are the
    // blocks the node's workers hold there.
    let size = exec.size();
    for sample in &selection.samples {
        let resident: u64 = lists
            .iter()
            .filter_map(|list| list.get(sample.slot))
            .map(|&b| sim_working_set(b))
            .sum();
        let expected = sim_time(sample.block, size, 2, resident, &params);
        assert_eq!(
            sample.elapsed.to_bits(),
            expected.to_bits(),
            "sample for {} at slot {}",
            sample.block,
            sample.slot
        );
    }

    // The fixture's winning sample is the contention-free full block.
    assert_eq!(selection.b_best, candidates[0]);
    let ws_slot0 = sim_working_set(candidates[0]) + sim_working_set(candidates[1]);
    assert!(ws_slot0 <= params.cache_bytes);
}

#[test]
fn verification_matches_a_brute_force_evaluation() {
    let (exec, candidates, params) = defect_fixture();
    let verification = tuner::verify(&exec, candidates[0]).unwrap();
    let resident = 2 * sim_working_set(candidates[0]);
    assert!(resident > params.cache_bytes);
    let expected = sim_time(candidates[0], exec.size(), 2, resident, &params);
    assert_eq!(verification.actual_time.to_bits(), expected.to_bits());
}

#[test]
fn lockstep_identity_holds_for_randomized_topologies() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for round in 0..40 {
        let nodes = rng.gen_range(1..=4);
        let cpn = rng.gen_range(1..=6);
        let cache = rng.gen_range(64 * 1024..8 * 1024 * 1024);
        let extent = rng.gen_range(8..=48);
        let parts = rng.gen_range(2..=4);
        let size = ProblemSize::new(extent, extent, extent).unwrap();
        let set = candidates::generate_uniform(size, parts).unwrap();
        let params = CostModelParams::default().with_cache_bytes(cache);
        let exec = Executor::new(
            Topology::new(nodes, cpn).unwrap().with_shared_cache_bytes(cache),
            size,
            rng.gen_range(1..=5),
            ExecMode::Model(params),
        )
        .unwrap();
        for strategy in [Strategy::Mmmb, Strategy::Mwmb, Strategy::Mamb] {
            let result = tuner::tune(&exec, &set.combinations, strategy).unwrap();
            assert_eq!(
                result.min_time, result.actual_time,
                "round {round}: {strategy} diverged on {nodes}x{cpn}, cache {cache}"
            );
            assert_eq!(result.quality_pct, 0.0);
            assert!(set.combinations.contains(&result.b_best));
        }
    }
}

#[test]
fn mwmb_stays_within_five_percent_of_the_exhaustive_minimum() {
    // Regression fixture: 64^3 per process, one 8-core node, 4 MiB cache,
    // default cost model, 5-parts candidate lattice.
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
    assert_eq!(lattice.len(), 125);

    let tuned = tuner::tune(&exec, &lattice.combinations, Strategy::Mwmb).unwrap();
    let ranking = tuner::exhaustive_search(&exec, &lattice.combinations).unwrap();
    let best = ranking.first().unwrap();
    let tuned_verify = tuned.actual_time;
    assert!(
        tuned_verify <= 1.05 * best.actual_time,
        "MWMB verify {tuned_verify} vs exhaustive best {}",
        best.actual_time
    );

    // Brute-force check of the ranking itself.
    let mut brute: Vec<(BlockSize, f64)> = lattice
        .combinations
        .iter()
        .map(|&b| {
            let resident = 8 * sim_working_set(b);
            (b, sim_time(b, size, 5, resident, &params))
        })
        .collect();
    brute.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    assert_eq!(ranking.len(), brute.len());
    assert_eq!(ranking[0].block, brute[0].0);
    assert_eq!(ranking[0].actual_time.to_bits(), brute[0].1.to_bits());
}
