//! Property tests for the blocked traversal.

use proptest::prelude::*;
use stencil_tune_core::stencil::{tiles, BlockSize, Grid3D, ProblemSize, SourceTerm};

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=20, 1usize..=20, 1usize..=20)
}

fn case() -> impl Strategy<Value = (ProblemSize, BlockSize, usize, bool)> {
    dims().prop_flat_map(|(si, sj, sk)| {
        (1..=si, 1..=sj, 1..=sk, 1usize..=4, any::<bool>()).prop_map(
            move |(bi, bj, bk, iters, with_source)| {
                (
                    ProblemSize::new(si, sj, sk).unwrap(),
                    BlockSize::new(bi, bj, bk).unwrap(),
                    iters,
                    with_source,
                )
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Tiling is a pure traversal-order change: outputs are bit-identical.
    #[test]
    fn tiled_equals_untiled_bitwise((size, block, iters, with_source) in case()) {
        let source = with_source.then(|| SourceTerm::centered(&size));
        let mut untiled = Grid3D::new(size, 0.05, 1.0).unwrap();
        // Deterministic non-trivial initial data.
        for i in 0..size.i {
            for j in 0..size.j {
                for k in 0..size.k {
                    untiled.set(i, j, k, ((i * 7 + j * 5 + k * 3) % 11) as f64 - 5.0);
                }
            }
        }
        let mut tiled = untiled.clone();
        for step in 0..iters {
            untiled.step_untiled(source.as_ref(), step);
            tiled.step_tiled(block, source.as_ref(), step).unwrap();
        }
        let as_bits = |xs: &[f64]| xs.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(as_bits(untiled.current()), as_bits(tiled.current()));
        prop_assert_eq!(as_bits(untiled.previous()), as_bits(tiled.previous()));
    }

    /// Every interior point is visited exactly once per sweep.
    #[test]
    fn tiles_partition_the_interior((size, block, _, _) in case()) {
        let mut visits = vec![0u8; size.i * size.j * size.k];
        for tile in tiles(size, block) {
            for i in tile.i.clone() {
                for j in tile.j.clone() {
                    for k in tile.k.clone() {
                        visits[(i * size.j + j) * size.k + k] += 1;
                    }
                }
            }
        }
        prop_assert!(visits.iter().all(|&c| c == 1));
    }
}
